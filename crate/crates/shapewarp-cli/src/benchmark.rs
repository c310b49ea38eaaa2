//! The desk-scale placement benchmark: per-trial scene synthesis, the full
//! inference + transfer pipeline, and a purely geometric success proxy
//! (minimum signed clearance ≥ −1 mm plus a task-specific topology test).

use std::path::{Path, PathBuf};

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shapewarp::inference::{infer_shape_pose, InferenceConfig};
use shapewarp::interaction::{transfer_placement, PlacementSpec};
use shapewarp::mesh::TriMesh;
use shapewarp::rng::rng_for_stream;
use shapewarp::transform::RigidTransform;
use shapewarp::warp::WarpSpace;

use crate::errors::CliError;
use crate::io::spec_files::{PlacementSpecFile, TransformJson};
use crate::io::{container::load_model, read_json};
use crate::scenes::{min_signed_clearance, random_rotation, random_yaw, view_cloud};
use crate::synth::{BoxParams, BowlParams, MugParams, ObjectParams, TreeParams};

pub const CLEARANCE_THRESHOLD_M: f64 = -0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    MugOnTree,
    BowlOnMug,
    BottleInContainer,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::MugOnTree => "mug_on_tree",
            TaskKind::BowlOnMug => "bowl_on_mug",
            TaskKind::BottleInContainer => "bottle_in_container",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoses {
    Upright,
    Arbitrary,
}

/// Where each trial's objects come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ObjectSource {
    /// Draw a fresh held-out pair per trial from the generator ranges.
    Sampled { seed: u64 },
    /// Reuse fixed objects (e.g. the demo pair) in every trial; only the
    /// start poses vary.
    Fixed {
        manifest_a: PathBuf,
        index_a: usize,
        manifest_b: PathBuf,
        index_b: usize,
    },
}

fn default_observation() -> ObservationConfig {
    ObservationConfig {
        points: 1200,
        keep_fraction: 0.65,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservationConfig {
    pub points: usize,
    pub keep_fraction: f64,
}

fn default_inference() -> InferenceSettings {
    let d = InferenceConfig::default();
    InferenceSettings {
        restarts: d.restarts,
        steps: d.steps,
        lr: d.learning_rate,
        beta_reg: d.extent_weight,
        subsample: d.subsample,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferenceSettings {
    pub restarts: usize,
    pub steps: usize,
    pub lr: f64,
    pub beta_reg: f64,
    pub subsample: usize,
}

impl InferenceSettings {
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

fn default_position_range() -> f64 {
    0.12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub task: TaskKind,
    /// Warp-space model for the child (placed) object.
    pub model_a: PathBuf,
    /// Warp-space model for the parent (target) object.
    pub model_b: PathBuf,
    pub placement_spec: PathBuf,
    pub trials: usize,
    pub seed: u64,
    pub start_poses: StartPoses,
    pub objects: ObjectSource,
    #[serde(default = "default_observation")]
    pub observation: ObservationConfig,
    #[serde(default = "default_inference")]
    pub inference: InferenceSettings,
    /// Half-width of the random translation box for start poses (meters).
    #[serde(default = "default_position_range")]
    pub position_range_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub success: bool,
    pub clearance_m: Option<f64>,
    pub topology_ok: Option<bool>,
    pub inference_loss_a: Option<f64>,
    pub inference_loss_b: Option<f64>,
    pub placement: Option<TransformJson>,
    pub start_pose_a: TransformJson,
    pub start_pose_b: TransformJson,
    pub params_a: ObjectParams,
    pub params_b: ObjectParams,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub task: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// 95% Wilson score interval for the success probability.
    pub confidence_95: [f64; 2],
    pub trial_results: Vec<TrialRecord>,
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> [f64; 2] {
    if trials == 0 {
        return [0.0, 1.0];
    }
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    [(center - half).max(0.0), (center + half).min(1.0)]
}

/// Success predicate for a completed placement, given ground-truth object
/// parameters and the final world poses of both meshes. Pure: re-scoring the
/// same geometry reproduces the same label.
pub fn score_placement(
    task: TaskKind,
    params_a: &ObjectParams,
    pose_a: &RigidTransform,
    params_b: &ObjectParams,
    pose_b: &RigidTransform,
    sample_seed: u64,
) -> Result<(f64, bool), String> {
    let mesh_a = params_a.mesh().transformed(pose_a);
    let mesh_b = params_b.mesh().transformed(pose_b);
    let clearance = min_signed_clearance(&mesh_a, &mesh_b, 1200, sample_seed)
        .map_err(|e| e.to_string())?;
    let topology = match task {
        TaskKind::MugOnTree => {
            let (ObjectParams::Mug(mug), ObjectParams::Tree(tree)) = (params_a, params_b) else {
                return Err("mug_on_tree needs mug (child) and tree (parent) objects".into());
            };
            branch_through_handle(mug, pose_a, tree, pose_b)
        }
        TaskKind::BowlOnMug => {
            let (ObjectParams::Bowl(bowl), ObjectParams::Mug(mug)) = (params_a, params_b) else {
                return Err("bowl_on_mug needs bowl (child) and mug (parent) objects".into());
            };
            bowl_on_rim(bowl, pose_a, mug, pose_b)
        }
        TaskKind::BottleInContainer => {
            let (ObjectParams::Bottle(_), ObjectParams::Box(bx)) = (params_a, params_b) else {
                return Err("bottle_in_container needs bottle (child) and box (parent) objects".into());
            };
            bbox_inside_cavity(&mesh_a, bx, pose_b)
        }
    };
    Ok((clearance, topology))
}

/// Does any branch's free-segment axis pass through the handle opening?
fn branch_through_handle(
    mug: &MugParams,
    pose_mug: &RigidTransform,
    tree: &TreeParams,
    pose_tree: &RigidTransform,
) -> bool {
    let center = pose_mug.apply(&mug.handle_center());
    let normal = pose_mug.rotation() * mug.handle_axis();
    let clear = mug.handle_clear_radius();
    tree.branch_segments().iter().any(|seg| {
        let s = pose_tree.apply(&seg.start);
        let e = pose_tree.apply(&seg.end);
        let dir = e - s;
        let denom = dir.dot(&normal);
        if denom.abs() < 1e-12 {
            return false; // Branch parallel to the loop plane.
        }
        let t = (center - s).dot(&normal) / denom;
        if !(0.0..=1.0).contains(&t) {
            return false;
        }
        let hit = s + dir * t;
        (hit - center).norm() < clear
    })
}

/// Is the bowl's base centred over the mug's rim opening and above it?
fn bowl_on_rim(
    bowl: &BowlParams,
    pose_bowl: &RigidTransform,
    mug: &MugParams,
    pose_mug: &RigidTransform,
) -> bool {
    let _ = bowl;
    let base = pose_bowl.apply(&Point3::origin());
    let rim_center = pose_mug.apply(&Point3::new(0.0, mug.body_height_m, 0.0));
    let horizontal =
        Vector3::new(base.x - rim_center.x, 0.0, base.z - rim_center.z).norm();
    horizontal <= mug.body_radius_m && base.y >= rim_center.y - 0.005
}

/// Is the placed mesh's world bounding box inside the container cavity?
fn bbox_inside_cavity(placed: &TriMesh, bx: &BoxParams, pose_box: &RigidTransform) -> bool {
    let inv = pose_box.inverse();
    let (cmin, cmax) = bx.cavity();
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for v in placed.vertices() {
        let p = inv.apply(v);
        lo = lo.inf(&p.coords);
        hi = hi.sup(&p.coords);
    }
    lo.x >= cmin.x && lo.y >= cmin.y && lo.z >= cmin.z
        && hi.x <= cmax.x && hi.y <= cmax.y && hi.z <= cmax.z
}

pub struct LoadedScenario {
    pub config: ScenarioConfig,
    pub space_a: WarpSpace,
    pub space_b: WarpSpace,
    pub placement: PlacementSpec,
    fixed_objects: Option<(ObjectParams, ObjectParams)>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads a scenario file, resolving referenced paths relative to its parent
/// directory and validating everything up front.
pub fn load_scenario(path: &Path) -> Result<LoadedScenario, CliError> {
    let config: ScenarioConfig = read_json(path)?;
    if config.trials == 0 {
        return Err(CliError::input("trial count must be ≥ 1"));
    }
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let model_a = load_model(&resolve(&base, &config.model_a))?;
    let model_b = load_model(&resolve(&base, &config.model_b))?;
    let spec_path = resolve(&base, &config.placement_spec);
    let spec_file: PlacementSpecFile = read_json(&spec_path)?;
    let placement = spec_file.to_spec(&spec_path)?;
    let fixed_objects = match &config.objects {
        ObjectSource::Sampled { .. } => None,
        ObjectSource::Fixed {
            manifest_a,
            index_a,
            manifest_b,
            index_b,
        } => {
            let ma: crate::synth::Manifest = read_json(&resolve(&base, manifest_a))?;
            let mb: crate::synth::Manifest = read_json(&resolve(&base, manifest_b))?;
            let pick = |m: &crate::synth::Manifest, i: usize, which: &str| {
                m.objects
                    .get(i)
                    .map(|e| e.params.clone())
                    .ok_or_else(|| {
                        CliError::input(format!("object index {i} out of range in manifest {which}"))
                    })
            };
            Some((pick(&ma, *index_a, "A")?, pick(&mb, *index_b, "B")?))
        }
    };
    Ok(LoadedScenario {
        config,
        space_a: model_a.space,
        space_b: model_b.space,
        placement,
        fixed_objects,
    })
}

/// Per-trial deterministic seed streams, disjoint across purposes.
fn trial_stream(seed: u64, trial: usize, purpose: u64) -> u64 {
    seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ purpose
}

fn sample_start_pose(
    kind: StartPoses,
    range: f64,
    rng: &mut impl Rng,
) -> RigidTransform {
    let rotation = match kind {
        StartPoses::Upright => random_yaw(rng),
        StartPoses::Arbitrary => random_rotation(rng),
    };
    let t = Vector3::new(
        rng.gen_range(-range..range),
        rng.gen_range(0.0..range),
        rng.gen_range(-range..range),
    );
    RigidTransform::new(rotation, t).expect("sampled rotation is proper")
}

fn trial_categories(task: TaskKind) -> (crate::synth::Category, crate::synth::Category) {
    use crate::synth::Category::*;
    match task {
        TaskKind::MugOnTree => (Mug, Tree),
        TaskKind::BowlOnMug => (Bowl, Mug),
        TaskKind::BottleInContainer => (Bottle, Box),
    }
}

fn run_trial(scenario: &LoadedScenario, trial: usize) -> TrialRecord {
    let cfg = &scenario.config;
    let (cat_a, cat_b) = trial_categories(cfg.task);
    let (params_a, params_b) = match (&scenario.fixed_objects, &cfg.objects) {
        (Some(pair), _) => pair.clone(),
        (None, ObjectSource::Sampled { seed }) => {
            let mut ra = rng_for_stream(*seed, 2 * trial as u64);
            let mut rb = rng_for_stream(*seed, 2 * trial as u64 + 1);
            (
                ObjectParams::sample(cat_a, &mut ra),
                ObjectParams::sample(cat_b, &mut rb),
            )
        }
        (None, ObjectSource::Fixed { .. }) => unreachable!("fixed objects are preloaded"),
    };

    // Parent objects stay upright (resting on their support surface); the
    // child's start pose follows the scenario setting.
    let mut pose_rng = rng_for_stream(cfg.seed, trial_stream(0, trial, 1));
    let start_a = sample_start_pose(cfg.start_poses, cfg.position_range_m, &mut pose_rng);
    let start_b = sample_start_pose(StartPoses::Upright, cfg.position_range_m, &mut pose_rng);

    let mut record = TrialRecord {
        trial,
        success: false,
        clearance_m: None,
        topology_ok: None,
        inference_loss_a: None,
        inference_loss_b: None,
        placement: None,
        start_pose_a: TransformJson::from_transform(&start_a),
        start_pose_b: TransformJson::from_transform(&start_b),
        params_a: params_a.clone(),
        params_b: params_b.clone(),
        error: None,
    };

    let run = || -> Result<(RigidTransform, f64, f64), String> {
        let mesh_a = params_a.mesh().transformed(&start_a);
        let mesh_b = params_b.mesh().transformed(&start_b);
        let cloud_a = view_cloud(
            &mesh_a,
            cfg.observation.points,
            cfg.observation.keep_fraction,
            trial_stream(cfg.seed, trial, 2),
        )
        .map_err(|e| e.to_string())?;
        let cloud_b = view_cloud(
            &mesh_b,
            cfg.observation.points,
            cfg.observation.keep_fraction,
            trial_stream(cfg.seed, trial, 3),
        )
        .map_err(|e| e.to_string())?;

        let est_a = infer_shape_pose(
            &scenario.space_a,
            &cloud_a,
            &cfg.inference.to_config(trial_stream(cfg.seed, trial, 4)),
        )
        .map_err(|e| format!("inference on object A failed: {e}"))?;
        let est_b = infer_shape_pose(
            &scenario.space_b,
            &cloud_b,
            &cfg.inference.to_config(trial_stream(cfg.seed, trial, 5)),
        )
        .map_err(|e| format!("inference on object B failed: {e}"))?;
        let decoded_a = est_a.decode_posed(&scenario.space_a).map_err(|e| e.to_string())?;
        let decoded_b = est_b.decode_posed(&scenario.space_b).map_err(|e| e.to_string())?;
        let motion = transfer_placement(&scenario.placement, &decoded_a, &decoded_b)
            .map_err(|e| format!("placement transfer failed: {e}"))?;
        Ok((motion, est_a.loss, est_b.loss))
    };

    match run() {
        Err(message) => record.error = Some(message),
        Ok((motion, loss_a, loss_b)) => {
            record.inference_loss_a = Some(loss_a);
            record.inference_loss_b = Some(loss_b);
            record.placement = Some(TransformJson::from_transform(&motion));
            let final_a = motion.compose(&start_a);
            match score_placement(
                cfg.task,
                &params_a,
                &final_a,
                &params_b,
                &start_b,
                trial_stream(cfg.seed, trial, 6),
            ) {
                Err(e) => record.error = Some(e),
                Ok((clearance, topology)) => {
                    record.clearance_m = Some(clearance);
                    record.topology_ok = Some(topology);
                    record.success = clearance >= CLEARANCE_THRESHOLD_M && topology;
                }
            }
        }
    }
    record
}

/// Runs every trial (concurrently; each trial derives its own seed streams)
/// and aggregates order-independently.
pub fn run_scenario(path: &Path) -> Result<BenchmarkReport, CliError> {
    let scenario = load_scenario(path)?;
    let trial_results: Vec<TrialRecord> = (0..scenario.config.trials)
        .into_par_iter()
        .map(|t| run_trial(&scenario, t))
        .collect();
    let successes = trial_results.iter().filter(|t| t.success).count();
    let trials = trial_results.len();
    Ok(BenchmarkReport {
        task: scenario.config.task.name().to_string(),
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        confidence_95: wilson_interval(successes, trials),
        trial_results,
    })
}
