//! Procedural synthetic object families. Each category samples its
//! parameters from documented ranges, builds a watertight mesh in a shared
//! canonical pose (base on the y=0 plane, +Y up, distinguishing feature
//! toward +X where one exists), and records every parameter in a manifest.

pub mod solids;

use nalgebra::{Point3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use shapewarp::mesh::TriMesh;

use solids::{capped_cylinder, cuboid, lathe, merge, torus, y_axis_to};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Mug,
    Bowl,
    Bottle,
    Box,
    Tree,
    Gripper,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Mug,
        Category::Bowl,
        Category::Bottle,
        Category::Box,
        Category::Tree,
        Category::Gripper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Mug => "mug",
            Category::Bowl => "bowl",
            Category::Bottle => "bottle",
            Category::Box => "box",
            Category::Tree => "tree",
            Category::Gripper => "gripper",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// A capped cylinder body with a full-torus handle whose loop lies in the
/// vertical XY plane; part of the torus is embedded in the body so the two
/// shells form one connected object.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MugParams {
    pub body_radius_m: f64,
    pub body_height_m: f64,
    pub handle_loop_radius_m: f64,
    pub handle_tube_radius_m: f64,
    /// Loop centre height as a fraction of body height.
    pub handle_height_frac: f64,
    /// Loop centre sits at body_radius + this fraction of the loop radius.
    pub handle_offset_frac: f64,
}

impl MugParams {
    pub fn sample(rng: &mut impl Rng) -> Self {
        let body_radius_m = rng.gen_range(0.034..0.050);
        let body_height_m = rng.gen_range(0.090..0.125);
        let handle_loop_radius_m = rng.gen_range(0.018..0.027);
        let handle_tube_radius_m = rng.gen_range(0.0050..0.0075);
        // Keep the whole loop within the body's vertical span.
        let reach = handle_loop_radius_m + handle_tube_radius_m;
        let lo = (0.05 * body_height_m + reach) / body_height_m;
        let hi = (0.95 * body_height_m - reach) / body_height_m;
        let u: f64 = rng.gen_range(0.0..1.0);
        let handle_height_frac = lo + u * (hi - lo);
        let handle_offset_frac = rng.gen_range(0.55..0.75);
        MugParams {
            body_radius_m,
            body_height_m,
            handle_loop_radius_m,
            handle_tube_radius_m,
            handle_height_frac,
            handle_offset_frac,
        }
    }

    /// Centre of the handle opening, canonical frame.
    pub fn handle_center(&self) -> Point3<f64> {
        Point3::new(
            self.body_radius_m + self.handle_offset_frac * self.handle_loop_radius_m,
            self.handle_height_frac * self.body_height_m,
            0.0,
        )
    }

    /// Normal of the handle-loop plane (the direction a branch threads
    /// through the handle).
    pub fn handle_axis(&self) -> Vector3<f64> {
        Vector3::z()
    }

    /// Radius of the circular free opening inside the handle.
    pub fn handle_clear_radius(&self) -> f64 {
        self.handle_loop_radius_m - self.handle_tube_radius_m
    }

    pub fn mesh(&self) -> TriMesh {
        let body = capped_cylinder(self.body_radius_m, self.body_height_m, 8, 28);
        // Torus is generated flat in the XZ plane (hole along +Y); stand it
        // up so the hole points along +Z, then move it onto the body wall.
        let handle = torus(self.handle_loop_radius_m, self.handle_tube_radius_m, 24, 12)
            .transformed(&y_axis_to(&Vector3::z(), self.handle_center().coords));
        merge(&[body, handle])
    }
}

/// A thickened spherical cap opening upward: outer cap, rim lip, inner cap.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BowlParams {
    pub sphere_radius_m: f64,
    pub cap_angle_rad: f64,
    pub thickness_m: f64,
}

impl BowlParams {
    pub fn sample(rng: &mut impl Rng) -> Self {
        BowlParams {
            sphere_radius_m: rng.gen_range(0.055..0.085),
            cap_angle_rad: rng.gen_range(0.95..1.25),
            thickness_m: rng.gen_range(0.004..0.007),
        }
    }

    pub fn rim_radius(&self) -> f64 {
        self.sphere_radius_m * self.cap_angle_rad.sin()
    }

    pub fn rim_height(&self) -> f64 {
        self.sphere_radius_m * (1.0 - self.cap_angle_rad.cos())
    }

    pub fn mesh(&self) -> TriMesh {
        let (rho, tau, theta) = (self.sphere_radius_m, self.thickness_m, self.cap_angle_rad);
        let steps = 10;
        let mut profile = vec![(0.0, 0.0)];
        for i in 1..=steps {
            let phi = theta * i as f64 / steps as f64;
            profile.push((rho * phi.sin(), rho * (1.0 - phi.cos())));
        }
        for i in (1..=steps).rev() {
            let phi = theta * i as f64 / steps as f64;
            profile.push(((rho - tau) * phi.sin(), rho - (rho - tau) * phi.cos()));
        }
        profile.push((0.0, tau));
        lathe(&profile, 28)
    }
}

/// A lathed bottle: cylindrical body, cosine shoulder, neck and lip.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BottleParams {
    pub body_radius_m: f64,
    pub total_height_m: f64,
    pub neck_radius_frac: f64,
    pub shoulder_start_frac: f64,
    pub neck_start_frac: f64,
}

impl BottleParams {
    pub fn sample(rng: &mut impl Rng) -> Self {
        BottleParams {
            body_radius_m: rng.gen_range(0.028..0.038),
            total_height_m: rng.gen_range(0.16..0.22),
            neck_radius_frac: rng.gen_range(0.32..0.45),
            shoulder_start_frac: rng.gen_range(0.52..0.62),
            neck_start_frac: rng.gen_range(0.72..0.80),
        }
    }

    pub fn mesh(&self) -> TriMesh {
        let (r, h) = (self.body_radius_m, self.total_height_m);
        let rn = self.neck_radius_frac * r;
        let (sh, nk) = (self.shoulder_start_frac, self.neck_start_frac);
        let mut profile = vec![(0.0, 0.0), (0.72 * r, 0.0), (r, 0.035 * h), (r, sh * h)];
        // Cosine blend from body radius to neck radius.
        let blend_steps = 6;
        for i in 1..blend_steps {
            let t = i as f64 / blend_steps as f64;
            let w = 0.5 - 0.5 * (std::f64::consts::PI * t).cos();
            profile.push((r + (rn - r) * w, (sh + (nk - sh) * t) * h));
        }
        profile.push((rn, nk * h));
        profile.push((rn, 0.94 * h));
        profile.push((1.28 * rn, 0.955 * h));
        profile.push((1.28 * rn, h));
        profile.push((0.0, h));
        lathe(&profile, 24)
    }
}

/// An open-top rectangular container: outer shell minus an inner cavity,
/// joined by a flat rim. Centred in x/z with its base on y=0.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoxParams {
    pub outer_length_m: f64,
    pub outer_width_m: f64,
    pub outer_height_m: f64,
    pub wall_thickness_m: f64,
}

impl BoxParams {
    pub fn sample(rng: &mut impl Rng) -> Self {
        // Sized so any sampled bottle fits lying flat inside the cavity.
        BoxParams {
            outer_length_m: rng.gen_range(0.24..0.30),
            outer_width_m: rng.gen_range(0.10..0.15),
            outer_height_m: rng.gen_range(0.09..0.13),
            wall_thickness_m: rng.gen_range(0.004..0.008),
        }
    }

    /// Interior cavity bounds (min, max corners), canonical frame.
    pub fn cavity(&self) -> (Point3<f64>, Point3<f64>) {
        let (l, w, h, t) = (
            self.outer_length_m,
            self.outer_width_m,
            self.outer_height_m,
            self.wall_thickness_m,
        );
        (
            Point3::new(-l / 2.0 + t, t, -w / 2.0 + t),
            Point3::new(l / 2.0 - t, h, w / 2.0 - t),
        )
    }

    pub fn mesh(&self) -> TriMesh {
        let (l, w, h) = (self.outer_length_m, self.outer_width_m, self.outer_height_m);
        let (cmin, cmax) = self.cavity();
        // 16 vertices: outer bottom ring, outer top ring, inner top ring,
        // inner bottom ring (cavity floor).
        let corners = [
            (-l / 2.0, -w / 2.0),
            (l / 2.0, -w / 2.0),
            (l / 2.0, w / 2.0),
            (-l / 2.0, w / 2.0),
        ];
        let inner = [
            (cmin.x, cmin.z),
            (cmax.x, cmin.z),
            (cmax.x, cmax.z),
            (cmin.x, cmax.z),
        ];
        let mut vertices = Vec::with_capacity(16);
        for &(x, z) in &corners {
            vertices.push(Point3::new(x, 0.0, z));
        }
        for &(x, z) in &corners {
            vertices.push(Point3::new(x, h, z));
        }
        for &(x, z) in &inner {
            vertices.push(Point3::new(x, h, z));
        }
        for &(x, z) in &inner {
            vertices.push(Point3::new(x, cmin.y, z));
        }
        let (o, t, i, b) = (0, 4, 8, 12);
        let mut faces = Vec::with_capacity(28);
        let mut quad = |a: usize, bq: usize, c: usize, d: usize| {
            faces.push([a, bq, c]);
            faces.push([a, c, d]);
        };
        // Outer bottom (two triangles spanning the base).
        quad(o, o + 1, o + 2, o + 3);
        for k in 0..4 {
            let k1 = (k + 1) % 4;
            // Outer wall, rim, inner wall.
            quad(o + k1, o + k, t + k, t + k1);
            quad(t + k1, t + k, i + k, i + k1);
            quad(i + k1, i + k, b + k, b + k1);
        }
        // Cavity floor.
        quad(b + 3, b + 2, b + 1, b);
        let mut faces = faces;
        // Orientation is fixed globally by the signed-volume convention used
        // for the lathe solids.
        let six_v: f64 = faces
            .iter()
            .map(|f| {
                let a = vertices[f[0]].coords;
                let bv = vertices[f[1]].coords;
                let c = vertices[f[2]].coords;
                a.dot(&bv.cross(&c))
            })
            .sum();
        if six_v < 0.0 {
            for f in faces.iter_mut() {
                f.swap(1, 2);
            }
        }
        TriMesh::new(vertices, faces).expect("box faces are valid")
    }
}

/// One branch of a mug tree.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BranchParams {
    pub height_frac: f64,
    pub azimuth_rad: f64,
    pub tilt_rad: f64,
    pub length_m: f64,
    pub radius_m: f64,
}

/// A mug tree: a base disk, a vertical post and three upward-tilted
/// cylindrical branches whose inner ends are embedded in the post.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TreeParams {
    pub base_radius_m: f64,
    pub base_height_m: f64,
    pub post_radius_m: f64,
    pub post_height_m: f64,
    pub branches: Vec<BranchParams>,
}

/// World-frame description of a branch's free (graspable) segment.
#[derive(Debug, Clone)]
pub struct BranchSegment {
    pub start: Point3<f64>,
    pub end: Point3<f64>,
    pub direction: Vector3<f64>,
    pub radius: f64,
}

impl TreeParams {
    pub fn sample(rng: &mut impl Rng) -> Self {
        let base_azimuths = [0.0, 2.0, 4.0].map(|k| k * std::f64::consts::FRAC_PI_3);
        let base_heights = [0.54, 0.71, 0.87];
        let branches = (0..3)
            .map(|i| BranchParams {
                height_frac: base_heights[i] + rng.gen_range(-0.035..0.035),
                azimuth_rad: base_azimuths[i] + rng.gen_range(-0.30..0.30),
                tilt_rad: rng.gen_range(0.18..0.38),
                length_m: rng.gen_range(0.065..0.090),
                radius_m: rng.gen_range(0.0035..0.0055),
            })
            .collect();
        TreeParams {
            base_radius_m: rng.gen_range(0.042..0.060),
            base_height_m: rng.gen_range(0.008..0.014),
            post_radius_m: rng.gen_range(0.008..0.012),
            post_height_m: rng.gen_range(0.24..0.32),
            branches,
        }
    }

    fn branch_direction(b: &BranchParams) -> Vector3<f64> {
        Vector3::new(
            b.tilt_rad.cos() * b.azimuth_rad.cos(),
            b.tilt_rad.sin(),
            b.tilt_rad.cos() * b.azimuth_rad.sin(),
        )
    }

    /// Free segments of every branch, canonical frame: from just outside the
    /// post surface to the branch tip.
    pub fn branch_segments(&self) -> Vec<BranchSegment> {
        self.branches
            .iter()
            .map(|b| {
                let dir = Self::branch_direction(b);
                let root = Point3::new(0.0, b.height_frac * self.post_height_m, 0.0);
                let start = root + dir * (1.4 * self.post_radius_m);
                let end = root + dir * (self.post_radius_m + b.length_m);
                BranchSegment {
                    start,
                    end,
                    direction: dir,
                    radius: b.radius_m,
                }
            })
            .collect()
    }

    pub fn mesh(&self) -> TriMesh {
        let mut parts = vec![
            capped_cylinder(self.base_radius_m, self.base_height_m, 1, 24),
            capped_cylinder(self.post_radius_m, self.post_height_m, 6, 18),
        ];
        for b in &self.branches {
            let dir = Self::branch_direction(b);
            let root = Vector3::new(0.0, b.height_frac * self.post_height_m, 0.0);
            let cyl = capped_cylinder(b.radius_m, b.length_m + self.post_radius_m, 2, 14)
                .transformed(&y_axis_to(&dir, root));
            parts.push(cyl);
        }
        merge(&parts)
    }
}

/// A parallel-jaw gripper: two finger slabs and a palm bridge, modelled as
/// three closed cuboids. The local frame has the gap centred on the origin,
/// fingers spanning x, width along y, and fingertips in the z=0 plane with
/// the body extending toward −z.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GripperParams {
    pub gap_m: f64,
    pub finger_length_m: f64,
    pub finger_thickness_m: f64,
    pub finger_width_m: f64,
    pub palm_depth_m: f64,
}

impl GripperParams {
    pub fn sample(rng: &mut impl Rng) -> Self {
        GripperParams {
            gap_m: rng.gen_range(0.070..0.105),
            finger_length_m: rng.gen_range(0.035..0.050),
            finger_thickness_m: 0.010,
            finger_width_m: rng.gen_range(0.018..0.024),
            palm_depth_m: 0.016,
        }
    }

    /// A gripper whose jaws open just wide enough to straddle a body of the
    /// given diameter with `slack` clearance per side. Fingers are sized so
    /// they reach past the body's widest line while the palm stays clear.
    pub fn for_body_diameter(diameter: f64, slack: f64) -> Self {
        GripperParams {
            gap_m: diameter + 2.0 * slack,
            finger_length_m: diameter / 2.0 + 0.022,
            finger_thickness_m: 0.010,
            finger_width_m: 0.020,
            palm_depth_m: 0.016,
        }
    }

    pub fn mesh(&self) -> TriMesh {
        let (g, lf, tf, w, pd) = (
            self.gap_m,
            self.finger_length_m,
            self.finger_thickness_m,
            self.finger_width_m,
            self.palm_depth_m,
        );
        let left = cuboid(
            &Point3::new(-g / 2.0 - tf, -w / 2.0, -lf),
            &Point3::new(-g / 2.0, w / 2.0, 0.0),
        );
        let right = cuboid(
            &Point3::new(g / 2.0, -w / 2.0, -lf),
            &Point3::new(g / 2.0 + tf, w / 2.0, 0.0),
        );
        // Palm overlaps the finger roots slightly so the assembly reads as
        // one object.
        let palm = cuboid(
            &Point3::new(-g / 2.0 - tf, -w / 2.0, -lf - pd),
            &Point3::new(g / 2.0 + tf, w / 2.0, -lf + 0.004),
        );
        merge(&[left, right, palm])
    }
}

/// Parameters for one sampled object, tagged by category.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "category", rename_all = "snake_case")]
pub enum ObjectParams {
    Mug(MugParams),
    Bowl(BowlParams),
    Bottle(BottleParams),
    Box(BoxParams),
    Tree(TreeParams),
    Gripper(GripperParams),
}

impl ObjectParams {
    pub fn sample(category: Category, rng: &mut impl Rng) -> Self {
        match category {
            Category::Mug => ObjectParams::Mug(MugParams::sample(rng)),
            Category::Bowl => ObjectParams::Bowl(BowlParams::sample(rng)),
            Category::Bottle => ObjectParams::Bottle(BottleParams::sample(rng)),
            Category::Box => ObjectParams::Box(BoxParams::sample(rng)),
            Category::Tree => ObjectParams::Tree(TreeParams::sample(rng)),
            Category::Gripper => ObjectParams::Gripper(GripperParams::sample(rng)),
        }
    }

    pub fn mesh(&self) -> TriMesh {
        match self {
            ObjectParams::Mug(p) => p.mesh(),
            ObjectParams::Bowl(p) => p.mesh(),
            ObjectParams::Bottle(p) => p.mesh(),
            ObjectParams::Box(p) => p.mesh(),
            ObjectParams::Tree(p) => p.mesh(),
            ObjectParams::Gripper(p) => p.mesh(),
        }
    }
}

/// Ground-truth record written next to generated meshes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub category: String,
    pub seed: u64,
    pub objects: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub params: ObjectParams,
}

/// Samples `count` objects deterministically: object `k` draws from the
/// stream `seed`+`k`, so families extend without reshuffling earlier members.
pub fn sample_family(category: Category, count: usize, seed: u64) -> Vec<ObjectParams> {
    (0..count)
        .map(|k| {
            let mut rng = shapewarp::rng::rng_for_stream(seed, k as u64);
            ObjectParams::sample(category, &mut rng)
        })
        .collect()
}
