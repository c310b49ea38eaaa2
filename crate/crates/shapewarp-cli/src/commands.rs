//! The subcommands behind the `shapewarp` binary: synthetic data generation,
//! model learning, inference, demonstration recording, transfer, the
//! placement benchmark and point-cloud segmentation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use shapewarp::cloud::PointCloud;
use shapewarp::cpd::CpdConfig;
use shapewarp::geometry::{dbscan, KdTree, MeshBvh};
use shapewarp::inference::{infer_shape_pose, InferenceConfig, InferenceError};
use shapewarp::interaction::{
    extract_grasp_contacts, extract_placement_points, placement_in_hand_frame, transfer_grasp,
    transfer_placement, InteractionError,
};
use shapewarp::mesh::TriMesh;
use shapewarp::transform::RigidTransform;
use shapewarp::warp::{learn_warp_space, SelectionMethod, WarpConfig, WarpError};

use crate::benchmark::run_scenario;
use crate::errors::CliError;
use crate::io::container::{load_model, save_model, ModelContainer, TrainingInfo};
use crate::io::obj::{read_obj, write_obj};
use crate::io::ply::{read_ply, write_ply};
use crate::io::spec_files::{
    EstimateFile, GraspSpecFile, PlacementSpecFile, TransferFile, TransformJson, ANGLE_UNITS,
    LENGTH_UNITS,
};
use crate::io::{read_json, write_json};
use crate::synth::{sample_family, Category, Manifest, ManifestEntry};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic object family as OBJ meshes plus a manifest.
    GenSynthetic(GenSyntheticArgs),
    /// Learn a deformation-space model from a directory of meshes.
    Learn(LearnArgs),
    /// Fit shape and pose to a partial point cloud.
    Infer(InferArgs),
    /// Record grasp and placement interaction points from one demonstration.
    RecordDemo(RecordDemoArgs),
    /// Transfer a recorded demonstration to newly observed objects.
    Transfer(TransferArgs),
    /// Run a placement benchmark scenario and write a per-trial report.
    Benchmark(BenchmarkArgs),
    /// Split a point cloud into density clusters.
    Segment(SegmentArgs),
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::GenSynthetic(args) => run_gen_synthetic(args),
        Command::Learn(args) => run_learn(args),
        Command::Infer(args) => run_infer(args),
        Command::RecordDemo(args) => run_record_demo(args),
        Command::Transfer(args) => run_transfer(args),
        Command::Benchmark(args) => run_benchmark(args),
        Command::Segment(args) => run_segment(args),
    }
}

fn parse_category(s: &str) -> Result<Category, String> {
    Category::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Category::ALL.iter().map(|c| c.name()).collect();
        format!("unknown category {s:?}; expected one of {}", names.join(", "))
    })
}

fn parse_selection(s: &str) -> Result<SelectionMethod, String> {
    match s {
        "auto" => Ok(SelectionMethod::Auto),
        "exhaustive" => Ok(SelectionMethod::Exhaustive),
        "approximate" => Ok(SelectionMethod::Approximate),
        other => other
            .parse::<usize>()
            .map(SelectionMethod::Fixed)
            .map_err(|_| format!("expected auto, exhaustive, approximate or a training index, got {other:?}")),
    }
}

fn selection_name(method: SelectionMethod) -> String {
    match method {
        SelectionMethod::Auto => "auto".into(),
        SelectionMethod::Exhaustive => "exhaustive".into(),
        SelectionMethod::Approximate => "approximate".into(),
        SelectionMethod::Fixed(i) => format!("fixed:{i}"),
    }
}

/// Shared optimizer flags for every command that runs shape/pose inference.
#[derive(Debug, Args)]
pub struct InferenceFlags {
    /// Random restarts of the optimizer.
    #[arg(long, default_value_t = InferenceConfig::default().restarts)]
    pub restarts: usize,
    /// Gradient steps per restart.
    #[arg(long, default_value_t = InferenceConfig::default().steps)]
    pub steps: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = InferenceConfig::default().learning_rate)]
    pub lr: f64,
    /// Weight of the model-extent penalty in the loss.
    #[arg(long, default_value_t = InferenceConfig::default().extent_weight)]
    pub beta_reg: f64,
    /// Model points scored per step (the full cloud scores the result).
    #[arg(long, default_value_t = InferenceConfig::default().subsample)]
    pub subsample: usize,
}

impl InferenceFlags {
    fn to_config(&self, seed: u64) -> InferenceConfig {
        InferenceConfig {
            restarts: self.restarts,
            steps: self.steps,
            learning_rate: self.lr,
            extent_weight: self.beta_reg,
            subsample: self.subsample,
            seed,
        }
    }
}

/// Disjoint seed for the second of two inferences driven by one user seed.
fn second_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

fn inference_error(e: InferenceError) -> CliError {
    match e {
        InferenceError::EmptyCloud
        | InferenceError::NonFiniteInput
        | InferenceError::InvalidConfig(_) => CliError::input(e.to_string()),
        InferenceError::InferenceFailed { restart_losses } => CliError::Inference {
            message: format!("all {} restarts diverged", restart_losses.len()),
            restart_losses,
        },
        other => CliError::Inference {
            message: other.to_string(),
            restart_losses: Vec::new(),
        },
    }
}

/// Post-inference decoding errors: these indicate an internal inconsistency
/// rather than bad input, so they surface as inference failures.
fn internal(e: WarpError) -> CliError {
    CliError::Inference {
        message: e.to_string(),
        restart_losses: Vec::new(),
    }
}

fn non_empty_cloud(path: &Path) -> Result<PointCloud, CliError> {
    let cloud = read_ply(path)?;
    if cloud.is_empty() {
        return Err(CliError::input(format!(
            "point cloud {} is empty",
            path.display()
        )));
    }
    Ok(cloud)
}

// ---------------------------------------------------------------------------
// gen-synthetic

#[derive(Debug, Args)]
pub struct GenSyntheticArgs {
    /// Object category: mug, bowl, bottle, box, tree or gripper.
    #[arg(long, value_parser = parse_category)]
    pub category: Category,
    /// Number of objects to generate.
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the meshes and `manifest.json`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run_gen_synthetic(args: &GenSyntheticArgs) -> Result<(), CliError> {
    fs::create_dir_all(&args.out_dir).map_err(|e| crate::io::io_err(&args.out_dir, e))?;
    let family = sample_family(args.category, args.count, args.seed);
    let mut objects = Vec::with_capacity(family.len());
    for (k, params) in family.iter().enumerate() {
        let file = format!("{}_{k:03}.obj", args.category.name());
        write_obj(&args.out_dir.join(&file), &params.mesh())?;
        objects.push(ManifestEntry {
            file,
            params: params.clone(),
        });
    }
    write_json(
        &args.out_dir.join("manifest.json"),
        &Manifest {
            category: args.category.name().into(),
            seed: args.seed,
            objects,
        },
    )?;
    println!(
        "wrote {} {} meshes to {}",
        args.count,
        args.category.name(),
        args.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// learn

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Directory of training meshes; every `*.obj` file, sorted by name.
    #[arg(long)]
    pub mesh_dir: PathBuf,
    /// Output model path.
    #[arg(long)]
    pub out: PathBuf,
    /// Category label stored in the model. Defaults to the mesh directory's
    /// manifest entry when present, otherwise "unknown".
    #[arg(long)]
    pub category: Option<String>,
    /// Latent dimension; defaults to min(K − 1, 8) for K training objects.
    #[arg(long)]
    pub latent_dim: Option<usize>,
    /// Motion-coherence weight of the registration.
    #[arg(long, default_value_t = CpdConfig::default().alpha)]
    pub alpha: f64,
    /// Width of the motion-coherence kernel.
    #[arg(long, default_value_t = CpdConfig::default().kernel_beta)]
    pub kernel_beta: f64,
    /// Uniform-outlier mixture weight in [0, 1).
    #[arg(long, default_value_t = CpdConfig::default().outlier_weight)]
    pub outlier_weight: f64,
    /// Registration iteration cap.
    #[arg(long, default_value_t = CpdConfig::default().max_iters)]
    pub max_iters: usize,
    /// Registration convergence tolerance.
    #[arg(long, default_value_t = CpdConfig::default().tol)]
    pub tol: f64,
    /// Canonical object choice: auto, exhaustive, approximate, or an index.
    #[arg(long, value_parser = parse_selection, default_value = "auto")]
    pub selection: SelectionMethod,
    /// Surface samples appended to the canonical mesh vertices.
    #[arg(long, default_value_t = WarpConfig::default().canonical_samples)]
    pub canonical_samples: usize,
    /// Surface samples per training object.
    #[arg(long, default_value_t = WarpConfig::default().training_samples)]
    pub training_samples: usize,
    /// Cloud-size cap during exhaustive canonical selection.
    #[arg(long, default_value_t = WarpConfig::default().selection_samples)]
    pub selection_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn learn_error(e: WarpError) -> CliError {
    match e {
        WarpError::Cpd(_) => CliError::Inference {
            message: e.to_string(),
            restart_losses: Vec::new(),
        },
        other => CliError::input(other.to_string()),
    }
}

pub fn run_learn(args: &LearnArgs) -> Result<(), CliError> {
    let entries = fs::read_dir(&args.mesh_dir).map_err(|e| crate::io::io_err(&args.mesh_dir, e))?;
    let mut mesh_paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "obj"))
        .collect();
    mesh_paths.sort();
    if mesh_paths.len() < 2 {
        return Err(CliError::input("need at least 2 meshes"));
    }
    let meshes: Vec<TriMesh> = mesh_paths
        .iter()
        .map(|p| read_obj(p))
        .collect::<Result<_, _>>()?;
    let category = match &args.category {
        Some(c) => c.clone(),
        None => read_json::<Manifest>(&args.mesh_dir.join("manifest.json"))
            .map(|m| m.category)
            .unwrap_or_else(|_| "unknown".into()),
    };

    let config = WarpConfig {
        latent_dim: args.latent_dim,
        canonical_samples: args.canonical_samples,
        training_samples: args.training_samples,
        selection_samples: args.selection_samples,
        selection: args.selection,
        cpd: CpdConfig {
            alpha: args.alpha,
            kernel_beta: args.kernel_beta,
            outlier_weight: args.outlier_weight,
            max_iters: args.max_iters,
            tol: args.tol,
        },
        seed: args.seed,
    };
    let space = learn_warp_space(&meshes, &config).map_err(learn_error)?;

    println!("canonical index: {}", space.canonical_index);
    let ratios: Vec<String> = space
        .explained_variance_ratios()
        .iter()
        .map(|r| r.to_string())
        .collect();
    println!("explained variance ratios: {}", ratios.join(" "));

    let training = TrainingInfo {
        object_count: meshes.len(),
        seed: args.seed,
        selection: selection_name(args.selection),
        alpha: args.alpha,
        kernel_beta: args.kernel_beta,
        outlier_weight: args.outlier_weight,
        cpd_max_iters: args.max_iters,
        cpd_tol: args.tol,
        canonical_samples: args.canonical_samples,
        training_samples: args.training_samples,
    };
    save_model(
        &args.out,
        &ModelContainer {
            category,
            space,
            training,
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// infer

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Learned model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Observed point cloud (PLY).
    #[arg(long)]
    pub cloud: PathBuf,
    /// Where to write the shape/pose estimate (JSON).
    #[arg(long)]
    pub out_estimate: PathBuf,
    /// Optionally write the reconstructed mesh, posed in the observed frame.
    #[arg(long)]
    pub out_mesh: Option<PathBuf>,
    #[command(flatten)]
    pub inference: InferenceFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run_infer(args: &InferArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let cloud = non_empty_cloud(&args.cloud)?;
    let est = infer_shape_pose(&model.space, &cloud, &args.inference.to_config(args.seed))
        .map_err(inference_error)?;
    write_json(&args.out_estimate, &EstimateFile::from_estimate(&est))?;
    if let Some(mesh_path) = &args.out_mesh {
        let mesh = est.reconstruct_mesh_posed(&model.space).map_err(internal)?;
        write_obj(mesh_path, &mesh)?;
    }
    println!("loss: {}", est.loss);
    Ok(())
}

// ---------------------------------------------------------------------------
// record-demo

#[derive(Debug, Args)]
pub struct RecordDemoArgs {
    /// Model for the manipulated object A.
    #[arg(long)]
    pub model_a: PathBuf,
    /// Model for the target object B.
    #[arg(long)]
    pub model_b: PathBuf,
    /// Observed cloud of object A in its demo pose (PLY).
    #[arg(long)]
    pub cloud_a: PathBuf,
    /// Observed cloud of object B in its demo pose (PLY).
    #[arg(long)]
    pub cloud_b: PathBuf,
    /// Gripper mesh in its own frame (OBJ).
    #[arg(long)]
    pub gripper: PathBuf,
    /// Demonstrated grasp: the gripper's world pose (JSON rigid transform).
    #[arg(long)]
    pub grasp_pose: PathBuf,
    /// Where to write the grasp interaction points (JSON).
    #[arg(long)]
    pub out_grasp: PathBuf,
    /// Where to write the placement interaction points (JSON).
    #[arg(long)]
    pub out_placement: PathBuf,
    /// Nearby-pair threshold between the two fitted clouds (meters).
    #[arg(long, default_value_t = 0.02)]
    pub delta: f64,
    /// Interaction pairs to keep, per spec.
    #[arg(long, default_value_t = 32)]
    pub pairs: usize,
    /// Anchor neighbors per virtual point.
    #[arg(long, default_value_t = 10)]
    pub neighbors: usize,
    /// Gripper-to-surface contact tolerance (meters).
    #[arg(long, default_value_t = 0.01)]
    pub contact_eps: f64,
    #[command(flatten)]
    pub inference: InferenceFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Attaches the closest-approach distance to grasp-extraction failures so a
/// hovering or misplaced gripper is diagnosable from the error alone.
fn grasp_extraction_error(
    e: InteractionError,
    object_mesh: &TriMesh,
    gripper_mesh: &TriMesh,
    grasp: &RigidTransform,
) -> CliError {
    match e {
        InteractionError::NoContacts | InteractionError::InsufficientContacts { .. } => {
            let posed = gripper_mesh.transformed(grasp);
            let distance =
                MeshBvh::min_distance(&MeshBvh::build(object_mesh), &MeshBvh::build(&posed));
            CliError::Extraction {
                message: e.to_string(),
                diagnostics: serde_json::json!({ "min_gripper_object_distance_m": distance }),
            }
        }
        InteractionError::InvalidRequest(_) => CliError::input(e.to_string()),
        other => CliError::Extraction {
            message: other.to_string(),
            diagnostics: serde_json::Value::Null,
        },
    }
}

/// Attaches the closest inter-cloud distance to placement-extraction
/// failures: if no pairs fall within δ, this says how far apart the fitted
/// objects actually are.
fn placement_extraction_error(
    e: InteractionError,
    cloud_a: &PointCloud,
    cloud_b: &PointCloud,
) -> CliError {
    match e {
        InteractionError::NoNearbyPoints { available } => {
            let tree = KdTree::build(cloud_b.points());
            let nearest = cloud_a
                .iter()
                .map(|p| tree.nearest(p).1)
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            CliError::Extraction {
                message: e.to_string(),
                diagnostics: serde_json::json!({
                    "available_pairs": available,
                    "nearest_cloud_distance_m": nearest,
                }),
            }
        }
        InteractionError::InvalidRequest(_) => CliError::input(e.to_string()),
        other => CliError::Extraction {
            message: other.to_string(),
            diagnostics: serde_json::Value::Null,
        },
    }
}

pub fn run_record_demo(args: &RecordDemoArgs) -> Result<(), CliError> {
    let model_a = load_model(&args.model_a)?;
    let model_b = load_model(&args.model_b)?;
    let cloud_a = non_empty_cloud(&args.cloud_a)?;
    let cloud_b = non_empty_cloud(&args.cloud_b)?;
    let gripper = read_obj(&args.gripper)?;
    let grasp = read_json::<TransformJson>(&args.grasp_pose)?.to_transform(&args.grasp_pose)?;

    let est_a = infer_shape_pose(&model_a.space, &cloud_a, &args.inference.to_config(args.seed))
        .map_err(inference_error)?;
    let est_b = infer_shape_pose(
        &model_b.space,
        &cloud_b,
        &args.inference.to_config(second_seed(args.seed)),
    )
    .map_err(inference_error)?;
    let decoded_a = est_a.decode_posed(&model_a.space).map_err(internal)?;
    let decoded_b = est_b.decode_posed(&model_b.space).map_err(internal)?;
    let mesh_a = est_a.reconstruct_mesh_posed(&model_a.space).map_err(internal)?;

    let grasp_spec = extract_grasp_contacts(
        &mesh_a,
        &decoded_a,
        &gripper,
        &grasp,
        args.contact_eps,
        args.pairs,
        args.seed,
    )
    .map_err(|e| grasp_extraction_error(e, &mesh_a, &gripper, &grasp))?;

    let placement_spec = extract_placement_points(
        &decoded_a,
        &decoded_b,
        args.delta,
        args.pairs,
        args.neighbors,
        args.seed,
    )
    .map_err(|e| placement_extraction_error(e, &decoded_a, &decoded_b))?;

    // Replay the anchors on the clouds they were extracted from; by
    // construction each virtual point must land back on its partner.
    let replayed = placement_spec
        .virtual_points(&decoded_a)
        .map_err(|e| CliError::Extraction {
            message: e.to_string(),
            diagnostics: serde_json::Value::Null,
        })?;
    let max_error = replayed
        .iter()
        .zip(&placement_spec.target_indices)
        .map(|(v, &ti)| (v - decoded_b[ti]).norm())
        .fold(0.0f64, f64::max);

    write_json(
        &args.out_grasp,
        &GraspSpecFile::from_spec(&grasp_spec, args.contact_eps, args.seed),
    )?;
    write_json(
        &args.out_placement,
        &PlacementSpecFile::from_spec(&placement_spec, args.seed, max_error),
    )?;
    println!("grasp contacts: {}", grasp_spec.pair_count());
    println!("placement pairs: {}", placement_spec.pair_count());
    println!("virtual point max error: {max_error}");
    Ok(())
}

// ---------------------------------------------------------------------------
// transfer

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Model for the manipulated object A.
    #[arg(long)]
    pub model_a: PathBuf,
    /// Model for the target object B.
    #[arg(long)]
    pub model_b: PathBuf,
    /// Recorded grasp interaction points (JSON).
    #[arg(long)]
    pub grasp_spec: PathBuf,
    /// Recorded placement interaction points (JSON).
    #[arg(long)]
    pub placement_spec: PathBuf,
    /// Newly observed cloud of object A (PLY).
    #[arg(long)]
    pub cloud_a: PathBuf,
    /// Newly observed cloud of object B (PLY).
    #[arg(long)]
    pub cloud_b: PathBuf,
    /// Where to write the transferred poses (JSON).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub inference: InferenceFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn transfer_error(e: InteractionError) -> CliError {
    CliError::Transfer {
        message: e.to_string(),
    }
}

pub fn run_transfer(args: &TransferArgs) -> Result<(), CliError> {
    let model_a = load_model(&args.model_a)?;
    let model_b = load_model(&args.model_b)?;
    let grasp_spec = read_json::<GraspSpecFile>(&args.grasp_spec)?.to_spec(&args.grasp_spec)?;
    let placement_spec =
        read_json::<PlacementSpecFile>(&args.placement_spec)?.to_spec(&args.placement_spec)?;
    let cloud_a = non_empty_cloud(&args.cloud_a)?;
    let cloud_b = non_empty_cloud(&args.cloud_b)?;

    let est_a = infer_shape_pose(&model_a.space, &cloud_a, &args.inference.to_config(args.seed))
        .map_err(inference_error)?;
    let est_b = infer_shape_pose(
        &model_b.space,
        &cloud_b,
        &args.inference.to_config(second_seed(args.seed)),
    )
    .map_err(inference_error)?;
    let decoded_a = est_a.decode_posed(&model_a.space).map_err(internal)?;
    let decoded_b = est_b.decode_posed(&model_b.space).map_err(internal)?;

    let grasp = transfer_grasp(&grasp_spec, &decoded_a).map_err(transfer_error)?;
    let placement =
        transfer_placement(&placement_spec, &decoded_a, &decoded_b).map_err(transfer_error)?;
    let in_hand = placement_in_hand_frame(&placement, &grasp);

    write_json(
        &args.out,
        &TransferFile {
            length_units: LENGTH_UNITS.into(),
            angle_units: ANGLE_UNITS.into(),
            grasp: TransformJson::from_transform(&grasp),
            placement: TransformJson::from_transform(&placement),
            grasp_after_placement: TransformJson::from_transform(&in_hand),
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// benchmark

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Scenario description (JSON); paths inside resolve relative to it.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Where to write the per-trial report (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_benchmark(args: &BenchmarkArgs) -> Result<(), CliError> {
    let report = run_scenario(&args.scenario)?;
    write_json(&args.out, &report)?;
    println!("task: {}", report.task);
    println!("trials: {}", report.trials);
    println!("successes: {}", report.successes);
    println!(
        "success rate: {:.3} (95% interval [{:.3}, {:.3}])",
        report.success_rate, report.confidence_95[0], report.confidence_95[1]
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// segment

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input point cloud (PLY).
    #[arg(long)]
    pub cloud: PathBuf,
    /// Neighborhood radius (meters).
    #[arg(long)]
    pub eps: f64,
    /// Neighbors (including the point itself) that make a core point.
    #[arg(long, default_value_t = 8)]
    pub min_pts: usize,
    /// Directory for the per-cluster PLY files.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run_segment(args: &SegmentArgs) -> Result<(), CliError> {
    if !(args.eps > 0.0 && args.eps.is_finite()) {
        return Err(CliError::input("eps must be positive and finite"));
    }
    let cloud = read_ply(&args.cloud)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| crate::io::io_err(&args.out_dir, e))?;

    let labels = dbscan(&cloud, args.eps, args.min_pts);
    let mut by_id: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        if let Some(id) = label {
            by_id.entry(*id).or_default().push(i);
        }
    }
    let mut clusters: Vec<Vec<usize>> = by_id.into_values().collect();
    // Largest first; equal sizes tie-break on the earliest member.
    clusters.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    if clusters.is_empty() {
        eprintln!("warning: every point was classified as noise; no clusters written");
        return Ok(());
    }
    for (k, indices) in clusters.iter().enumerate() {
        let part = cloud.select(indices);
        write_ply(&args.out_dir.join(format!("cluster_{k:03}.ply")), &part, false)?;
    }
    println!("wrote {} clusters", clusters.len());
    Ok(())
}
