//! Test-only oracles and helpers shared by the integration suites.
#![allow(dead_code)]

use cdts_core::cga::{blade, Bivector, Motor, Multivector};
use cdts_core::kinematics::{JointSpec, Pose, RobotDescription};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn random_point(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 3] {
    [uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale)]
}

pub fn random_multivector(rng: &mut ChaCha8Rng) -> Multivector {
    let mut m = Multivector::zero();
    for i in 0..blade::COUNT {
        m[i] = uniform(rng, -1.0, 1.0);
    }
    m
}

pub fn random_vector(rng: &mut ChaCha8Rng) -> Multivector {
    Multivector::vector(random_point(rng, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0))
}

/// Random bivector with rotation magnitude in (lo, hi) and translation in a
/// unit box.
pub fn random_bivector(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Bivector {
    let dir = random_unit(rng);
    let theta = uniform(rng, lo, hi);
    Bivector::from_parts([dir[0] * theta, dir[1] * theta, dir[2] * theta], random_point(rng, 1.0))
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = random_point(rng, 1.0);
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

pub fn random_motor(rng: &mut ChaCha8Rng) -> Motor {
    random_bivector(rng, 0.0, 3.0).exp()
}

pub fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

/// Central differences of `f` at `x`, one column per coordinate.
pub fn finite_difference(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let m = f(x).len();
    let mut out = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        for i in 0..m {
            out[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    out
}

/// `|A - F| / |F|` in the Frobenius norm (absolute when `F` vanishes).
pub fn relative_error(analytic: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    let diff = (analytic - reference).norm();
    let scale = reference.norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

// ---------------------------------------------------------------------------
// Cayley table oracles

type Dense = [f64; 32];

/// Null-basis metric g(a, b) on generators e1, e2, e3, e0, e∞.
fn null_metric(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 0) | (1, 1) | (2, 2) => 1.0,
        (3, 4) | (4, 3) => -1.0,
        _ => 0.0,
    }
}

fn bits_below(mask: usize, a: usize) -> u32 {
    (mask & ((1 << a) - 1)).count_ones()
}

/// Left contraction of generator `a` onto blade `mask`.
fn contract(a: usize, mask: usize) -> Dense {
    let mut out = [0.0; 32];
    let mut position = 0;
    for b in 0..5 {
        if mask & (1 << b) != 0 {
            let g = null_metric(a, b);
            if g != 0.0 {
                let sign = if position % 2 == 0 { 1.0 } else { -1.0 };
                out[mask & !(1 << b)] += sign * g;
            }
            position += 1;
        }
    }
    out
}

/// Generator `a` times a dense multivector: `a⌋X + a∧X`.
fn vector_times(a: usize, x: &Dense) -> Dense {
    let mut out = [0.0; 32];
    for (mask, &c) in x.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        if mask & (1 << a) == 0 {
            let sign = if bits_below(mask, a) % 2 == 0 { 1.0 } else { -1.0 };
            out[mask | (1 << a)] += sign * c;
        }
        let inner = contract(a, mask);
        for (m, v) in inner.iter().enumerate() {
            out[m] += c * v;
        }
    }
    out
}

/// Blade (outer product of generators in `mask`) times `x`, by the
/// Chevalley recursion `(a∧B') X = a (B' X) - (a⌋B') X`.
fn blade_times(mask: usize, x: &Dense) -> Dense {
    if mask == 0 {
        return *x;
    }
    let a = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << a);
    let first = vector_times(a, &blade_times(rest, x));
    let mut out = first;
    let inner = contract(a, rest);
    for (m, &c) in inner.iter().enumerate() {
        if c != 0.0 {
            let term = blade_times(m, x);
            for (k, v) in term.iter().enumerate() {
                out[k] -= c * v;
            }
        }
    }
    out
}

/// Product of null-basis blades `a` and `b` (masks), computed directly in
/// the null metric without any change of basis.
pub fn chevalley_product(a: u8, b: u8) -> Multivector {
    let mut x = [0.0; 32];
    x[b as usize] = 1.0;
    let dense = blade_times(a as usize, &x);
    from_mask_dense(&dense)
}

fn from_mask_dense(d: &Dense) -> Multivector {
    let mut out = Multivector::zero();
    for i in 0..blade::COUNT {
        out[i] = d[blade::mask(i) as usize];
    }
    out
}

fn reorder_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0;
    for i in 0..5 {
        if b & (1 << i) != 0 {
            swaps += (a >> (i + 1)).count_ones() & 1;
        }
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Cayley table in the diagonal basis {e1, e2, e3, e+, e-}.
fn diagonal_blade_product(a: usize, b: usize) -> (usize, f64) {
    let metric = [1.0, 1.0, 1.0, 1.0, -1.0];
    let mut sign = reorder_sign(a, b);
    for (i, g) in metric.iter().enumerate() {
        if a & b & (1 << i) != 0 {
            sign *= g;
        }
    }
    (a ^ b, sign)
}

fn diagonal_wedge(a: &Dense, b: &Dense) -> Dense {
    let mut out = [0.0; 32];
    for i in 0..32 {
        for j in 0..32 {
            if i & j == 0 && a[i] != 0.0 && b[j] != 0.0 {
                out[i | j] += reorder_sign(i, j) * a[i] * b[j];
            }
        }
    }
    out
}

/// Products of null-basis blades obtained from the diagonal-basis Cayley
/// table through a 32×32 change-of-basis matrix and its numerical inverse.
pub struct DiagonalOracle {
    to_diag: DMatrix<f64>,
    to_null: DMatrix<f64>,
}

impl DiagonalOracle {
    pub fn new() -> Self {
        let mut gens = [[0.0; 32]; 5];
        gens[0][1] = 1.0;
        gens[1][2] = 1.0;
        gens[2][4] = 1.0;
        // e0 = (e- - e+)/2, e∞ = e- + e+
        gens[3][8] = -0.5;
        gens[3][16] = 0.5;
        gens[4][8] = 1.0;
        gens[4][16] = 1.0;
        let mut to_diag = DMatrix::zeros(32, 32);
        for mask in 0..32 {
            let mut acc = [0.0; 32];
            acc[0] = 1.0;
            for (g, v) in gens.iter().enumerate() {
                if mask & (1 << g) != 0 {
                    acc = diagonal_wedge(&acc, v);
                }
            }
            for r in 0..32 {
                to_diag[(r, mask)] = acc[r];
            }
        }
        let to_null = to_diag.clone().try_inverse().expect("basis change is invertible");
        Self { to_diag, to_null }
    }

    pub fn product(&self, a: u8, b: u8) -> Multivector {
        let ca = self.to_diag.column(a as usize);
        let cb = self.to_diag.column(b as usize);
        let mut prod = DVector::zeros(32);
        for i in 0..32 {
            for j in 0..32 {
                if ca[i] != 0.0 && cb[j] != 0.0 {
                    let (k, s) = diagonal_blade_product(i, j);
                    prod[k] += s * ca[i] * cb[j];
                }
            }
        }
        let null = &self.to_null * prod;
        let mut dense = [0.0; 32];
        for (m, v) in dense.iter_mut().enumerate() {
            *v = null[m];
        }
        from_mask_dense(&dense)
    }
}

/// `exp(B)` by its power series in the full geometric product.
pub fn exp_series(b: &Multivector) -> Multivector {
    let mut term = Multivector::scalar(1.0);
    let mut sum = term;
    for k in 1..40 {
        term = term * *b * (1.0 / k as f64);
        sum += term;
    }
    sum
}

/// Rotation matrix of a unit quaternion (w, x, y, z).
pub fn quaternion_matrix(q: [f64; 4]) -> [[f64; 3]; 3] {
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn axis_angle_quaternion(axis: [f64; 3], angle: f64) -> [f64; 4] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (s, c) = (angle / 2.0).sin_cos();
    [c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n]
}

// ---------------------------------------------------------------------------
// Kinematic oracles

pub type Homogeneous = nalgebra::Matrix4<f64>;

pub const FRANKA_HOME: [f64; 7] = [
    0.0,
    -std::f64::consts::FRAC_PI_4,
    0.0,
    -3.0 * std::f64::consts::FRAC_PI_4,
    0.0,
    std::f64::consts::FRAC_PI_2,
    std::f64::consts::FRAC_PI_4,
];

pub const FRANKA_LIMITS: [[f64; 2]; 7] = [
    [-2.8973, 2.8973],
    [-1.7628, 1.7628],
    [-2.8973, 2.8973],
    [-3.0718, -0.0698],
    [-2.8973, 2.8973],
    [-0.0175, 3.7525],
    [-2.8973, 2.8973],
];

/// Modified DH rows (a_{i-1}, d_i, α_{i-1}) of the Panda, then flange and hand.
pub const FRANKA_DH: [(f64, f64, f64); 7] = [
    (0.0, 0.333, 0.0),
    (0.0, 0.0, -std::f64::consts::FRAC_PI_2),
    (0.0, 0.316, std::f64::consts::FRAC_PI_2),
    (0.0825, 0.0, std::f64::consts::FRAC_PI_2),
    (-0.0825, 0.384, -std::f64::consts::FRAC_PI_2),
    (0.0, 0.0, std::f64::consts::FRAC_PI_2),
    (0.088, 0.0, std::f64::consts::FRAC_PI_2),
];
pub const FRANKA_FLANGE: f64 = 0.107;
pub const FRANKA_HAND: f64 = 0.1034;

pub fn rot_x(a: f64) -> Homogeneous {
    let (s, c) = a.sin_cos();
    Homogeneous::new(1.0, 0.0, 0.0, 0.0, 0.0, c, -s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, 1.0)
}

pub fn rot_z(a: f64) -> Homogeneous {
    let (s, c) = a.sin_cos();
    Homogeneous::new(c, -s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
}

pub fn trans(t: [f64; 3]) -> Homogeneous {
    let mut m = Homogeneous::identity();
    m[(0, 3)] = t[0];
    m[(1, 3)] = t[1];
    m[(2, 3)] = t[2];
    m
}

/// Craig-convention chain `Π RotX(α) TransX(a) RotZ(θ) TransZ(d)`, then the
/// flange and the hand frame.
pub fn franka_dh_fk(q: &[f64]) -> Homogeneous {
    let mut t = Homogeneous::identity();
    for (i, &(a, d, alpha)) in FRANKA_DH.iter().enumerate() {
        t = t * rot_x(alpha) * trans([a, 0.0, 0.0]) * rot_z(q[i]) * trans([0.0, 0.0, d]);
    }
    t * trans([0.0, 0.0, FRANKA_FLANGE]) * rot_z(-std::f64::consts::FRAC_PI_4) * trans([0.0, 0.0, FRANKA_HAND])
}

/// Panda in axis-point form: every axis is the local z-axis; offsets carry
/// the next row's `a` and `α` and this row's `d`.
pub fn franka_description(name: &str, base: Pose) -> RobotDescription {
    let joints = (0..7)
        .map(|i| {
            let d = FRANKA_DH[i].1;
            let (a, extra, quaternion) = if i < 6 {
                let (a, _, alpha) = FRANKA_DH[i + 1];
                let half = alpha / 2.0;
                (a, 0.0, [half.cos(), half.sin(), 0.0, 0.0])
            } else {
                let half = -std::f64::consts::FRAC_PI_8;
                (0.0, FRANKA_FLANGE + FRANKA_HAND, [half.cos(), 0.0, 0.0, half.sin()])
            };
            JointSpec {
                axis: [0.0, 0.0, 1.0],
                point: [0.0; 3],
                offset_translation: [a, 0.0, d + extra],
                offset_quaternion: quaternion,
                limits: FRANKA_LIMITS[i],
            }
        })
        .collect();
    RobotDescription { name: name.into(), base_pose: base, joints }
}

/// Rotation by `angle` about the line through `point` along unit `axis`.
pub fn axis_rotation(axis: [f64; 3], point: [f64; 3], angle: f64) -> Homogeneous {
    let r = quaternion_matrix(axis_angle_quaternion(axis, angle));
    let mut m = Homogeneous::identity();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = r[i][j];
        }
    }
    trans(point) * m * trans([-point[0], -point[1], -point[2]])
}

pub fn pose_matrix(t: [f64; 3], q: [f64; 4]) -> Homogeneous {
    let r = quaternion_matrix(q);
    let mut m = trans(t);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = r[i][j];
        }
    }
    m
}

/// Homogeneous-transform evaluation of a robot description.
pub fn description_fk(d: &RobotDescription, q: &[f64]) -> Homogeneous {
    let mut t = pose_matrix(d.base_pose.translation, d.base_pose.quaternion);
    for (j, &qi) in d.joints.iter().zip(q) {
        t = t * axis_rotation(j.axis, j.point, qi) * pose_matrix(j.offset_translation, j.offset_quaternion);
    }
    t
}

/// Homogeneous matrix of a unit motor from its action on points.
pub fn motor_matrix(m: &Motor) -> Homogeneous {
    let mut out = Homogeneous::identity();
    let o = m.origin();
    let r = m.rotation_matrix();
    for i in 0..3 {
        for j in 0..3 {
            out[(i, j)] = r[i][j];
        }
        out[(i, 3)] = o[i];
    }
    out
}

pub fn random_configuration(rng: &mut ChaCha8Rng, limits: &[[f64; 2]]) -> Vec<f64> {
    limits.iter().map(|l| uniform(rng, l[0], l[1])).collect()
}

/// Two Pandas 1 m apart facing each other along x.
pub fn dual_franka() -> cdts_core::kinematics::DualArmSystem {
    let half = std::f64::consts::FRAC_PI_2;
    let left = Pose { translation: [-0.5, 0.0, 0.0], quaternion: [1.0, 0.0, 0.0, 0.0] };
    let right = Pose { translation: [0.5, 0.0, 0.0], quaternion: [half.cos(), 0.0, 0.0, half.sin()] };
    cdts_core::kinematics::DualArmSystem::new(
        cdts_core::kinematics::load_robot(&franka_description("left", left)).unwrap(),
        cdts_core::kinematics::load_robot(&franka_description("right", right)).unwrap(),
    )
    .unwrap()
}

pub fn dual_home() -> Vec<f64> {
    FRANKA_HOME.iter().chain(FRANKA_HOME.iter()).copied().collect()
}
