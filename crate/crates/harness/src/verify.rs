//! Closed-form checks, each returning a list of named pass/fail comparisons.

use std::f64::consts::PI;
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use sphere_rk::baselines::{angle_recurrence, baseline_step, AngleScheme, BaselineId};
use sphere_rk::field::FnField;
use sphere_rk::integrators::CombineMode;
use sphere_rk::geom::{geodesic_distance, slerp, SLERP_ANTIPODAL_GAP};
use sphere_rk::quat::quat_slerp;
use sphere_rk::{SchemeId, UnitVector3, Vec3};

use crate::convergence::{default_h_list, fit_order, run_convergence_many, ConvergenceReport, Problem};
use crate::method::Method;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    /// `|value - target| ≤ tol`.
    Near { target: f64, tol: f64 },
    /// `|value - target| ≤ rel·|target|`.
    Relative { target: f64, rel: f64 },
    /// `lo ≤ value ≤ hi`.
    Range { lo: f64, hi: f64 },
    AtMost { max: f64 },
    AtLeast { min: f64 },
    /// Reported for context only; always passes.
    Info,
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::Near { target, tol } => (v - target).abs() <= tol,
            Bound::Relative { target, rel } => (v - target).abs() <= rel * target.abs(),
            Bound::Range { lo, hi } => (lo..=hi).contains(&v),
            Bound::AtMost { max } => v <= max,
            Bound::AtLeast { min } => v >= min,
            Bound::Info => true,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::Near { target, tol } => write!(f, "{target} ± {tol}"),
            Bound::Relative { target, rel } => write!(f, "{target:.6e} ± {}%", rel * 100.0),
            Bound::Range { lo, hi } => write!(f, "in [{lo}, {hi}]"),
            Bound::AtMost { max } => write!(f, "≤ {max:e}"),
            Bound::AtLeast { min } => write!(f, "≥ {min:e}"),
            Bound::Info => f.write_str("info"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            pass: bound.admits(value),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (self.pass, self.bound) {
            (_, Bound::Info) => "INFO",
            (true, _) => "ok",
            (false, _) => "FAIL",
        };
        write!(f, "{tag:>4}  {}: {:.6e} (expected {})", self.name, self.value, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub target: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// One TVDRK2 step from `(0, -1, 0)` under a field turning about `z` with
/// speed `a` where `x ≤ 0` and `b` where `x > 0`: the first stage moves with
/// speed `a`, the second is evaluated on the other side with speed `b`.
/// Returns `‖p¹‖ - 1`.
pub fn planar_norm_defect(a: f64, b: f64, h: f64) -> Result<f64> {
    let field = FnField::autonomous(move |q: &UnitVector3, _: f64| {
        let speed = if q.x() > 0.0 { b } else { a };
        Vec3::z().cross(q.as_vec()) * speed
    });
    let p = baseline_step(BaselineId::Tvdrk2, &field, &Vec3::new(0.0, -1.0, 0.0), 0.0, h)?;
    Ok(p.norm() - 1.0)
}

/// Least-squares fit of `defect/h² = c₂ + c₄h² + c₆h⁴`; returns `(c₂, c₄)`.
fn even_series_coefficients(hs: &[f64], defects: &[f64]) -> (f64, f64) {
    // Normal equations for a three-column Vandermonde system in h².
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (&h, &d) in hs.iter().zip(defects) {
        let x = h * h;
        let row = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * d / x;
        }
    }
    let m = nalgebra::Matrix3::from_fn(|i, j| ata[i][j]);
    let c = m.lu().solve(&nalgebra::Vector3::from(atb)).expect("distinct step sizes");
    (c[0], c[1])
}

/// Default steps for extracting the norm-defect series.
pub fn appendix_a_h_list() -> Vec<f64> {
    (0..6).map(|k| 0.1 * 2f64.powi(-k)).collect()
}

/// Norm defect of one TVDRK2 step on the planar two-speed construction.
pub fn verify_appendix_a(a: f64, b: f64, h_list: &[f64]) -> Result<Report> {
    let defects = h_list
        .iter()
        .map(|&h| planar_norm_defect(a, b, h))
        .collect::<Result<Vec<_>>>()?;
    let (c2, c4) = even_series_coefficients(h_list, &defects);
    let d = a - b;
    let c2_expected = d * d / 8.0;
    let c4_stated = -(d.powi(4) + 16.0 * a.powi(3) * b) / 128.0;
    // Symbolic expansion of the same construction.
    let c4_series = -(d.powi(4) - 16.0 * a.powi(3) * b) / 128.0;
    let c2_bound = if c2_expected == 0.0 {
        Bound::Near { target: 0.0, tol: 1e-8 }
    } else {
        Bound::Relative {
            target: c2_expected,
            rel: 0.01,
        }
    };
    Ok(Report {
        target: "appendix-a".into(),
        checks: vec![
            Check::new(format!("h^2 coefficient (a={a}, b={b})"), c2, c2_bound),
            Check::new(
                format!("h^4 coefficient vs -((a-b)^4+16a^3b)/128 (a={a}, b={b})"),
                c4,
                Bound::Relative { target: c4_stated, rel: 0.02 },
            ),
            Check::new("h^4 coefficient, series of the construction", c4_series, Bound::Info),
            Check::new(
                "h^4 coefficient vs series of the construction",
                c4,
                Bound::Relative { target: c4_series, rel: 0.02 },
            ),
        ],
    })
}

/// One-step error `|θ¹ - e^h|` of the angle recurrences for `θ' = θ`, `θ⁰ = 1`.
pub fn angle_local_error(scheme: AngleScheme, h: f64) -> f64 {
    (angle_recurrence(scheme, 1.0, h) - h.exp()).abs()
}

/// Orders of the internal-projection angle recurrences.
pub fn verify_appendix_b() -> Report {
    let hs: Vec<f64> = (0..6).map(|k| 0.01 * 2f64.powi(-k)).collect();
    let mut checks = Vec::new();
    for (scheme, name, expected) in [
        (AngleScheme::Pfe, "pfe", 1.0),
        (AngleScheme::Ptvdrk2p, "ptvdrk2p", 2.0),
        (AngleScheme::Ptvdrk3p, "ptvdrk3p", 2.0),
    ] {
        let rows: Vec<(f64, f64)> = hs.iter().map(|&h| (h, angle_local_error(scheme, h))).collect();
        let order = fit_order(&rows).map(|slope| slope - 1.0).unwrap_or(f64::NAN);
        checks.push(Check::new(
            format!("{name} order"),
            order,
            Bound::Near { target: expected, tol: 0.1 },
        ));
    }
    // Richardson on (θ¹ - e^h)/h³ = c₃ + c₄h + O(h²).
    let c3 = |h: f64| (angle_recurrence(AngleScheme::Ptvdrk3p, 1.0, h) - h.exp()) / h.powi(3);
    let h = 1e-3;
    let lead = 2.0 * c3(h / 2.0) - c3(h);
    checks.push(Check::new(
        "ptvdrk3p leading error coefficient",
        lead,
        Bound::Relative {
            target: -1.0 / 3.0,
            rel: 0.05,
        },
    ));
    Report {
        target: "appendix-b".into(),
        checks,
    }
}

pub const PARITY_PAIRS: usize = 1000;
pub const PARITY_SEED: u64 = 0x51e7;

fn random_unit(rng: &mut StdRng) -> UnitVector3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if (0.1..=1.0).contains(&n) {
            return sphere_rk::geom::project(&v).expect("nonzero");
        }
    }
}

/// Quaternion and geodesic SLERP on random non-antipodal pairs.
pub fn verify_slerp_parity(pairs: usize, seed: u64) -> Result<Report> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut parity, mut endpoints, mut midpoint) = (0.0f64, 0.0f64, 0.0f64);
    let mut done = 0;
    while done < pairs {
        let p = random_unit(&mut rng);
        let q = random_unit(&mut rng);
        if geodesic_distance(&p, &q) > PI - 1e3 * SLERP_ANTIPODAL_GAP {
            continue;
        }
        let t = rng.gen_range(0.0..1.0);
        let diff = |a: &UnitVector3, b: &UnitVector3| (a.as_vec() - b.as_vec()).amax();
        parity = parity.max(diff(&slerp(&p, &q, t)?, &quat_slerp(&p, &q, t)?));
        for interp in [slerp, quat_slerp] {
            endpoints = endpoints.max(diff(&interp(&p, &q, 0.0)?, &p)).max(diff(&interp(&p, &q, 1.0)?, &q));
            let m = interp(&p, &q, 0.5)?;
            midpoint = midpoint
                .max(diff(&m, &interp(&q, &p, 0.5)?))
                .max((geodesic_distance(&m, &p) - geodesic_distance(&m, &q)).abs());
        }
        done += 1;
    }
    Ok(Report {
        target: "slerp-parity".into(),
        checks: vec![
            Check::new("max |geodesic - quaternion|", parity, Bound::AtMost { max: 1e-12 }),
            Check::new("max endpoint deviation", endpoints, Bound::AtMost { max: 1e-13 }),
            Check::new("max midpoint asymmetry", midpoint, Bound::AtMost { max: 1e-13 }),
        ],
    })
}

/// Expected E₂ orders of the comparison table.
pub const TABLE2_E2_ORDERS: [(&str, f64); 13] = [
    ("sfe", 1.0),
    ("stvdrk2", 2.0),
    ("stvdrk3", 3.0),
    ("tvdrk2", 2.0),
    ("tvdrk3", 3.0),
    ("rk3", 3.0),
    ("rk4", 4.0),
    ("prk3", 3.0),
    ("prk4", 4.0),
    ("ptvdrk2", 2.0),
    ("ptvdrk2p", 2.0),
    ("ptvdrk3", 3.0),
    ("ptvdrk3p", 2.0),
];
pub const TABLE2_E2_TOL: f64 = 0.25;

/// Expected E_norm orders of the unprojected Cartesian methods.
pub const TABLE2_ENORM_ORDERS: [(&str, f64); 4] = [("tvdrk2", 3.0), ("tvdrk3", 3.0), ("rk3", 3.0), ("rk4", 4.0)];
pub const TABLE2_ENORM_TOL: f64 = 0.3;
/// E_norm of methods that stay on the sphere.
pub const ON_SPHERE_ENORM: f64 = 1e-12;

/// Fitted order ranges of the fourth-order SLERP attempts.
pub const FOURTH_ORDER_RANGES: [(&str, f64, f64); 4] = [
    ("stvdrk4", 2.5, 3.5),
    ("ssprk54", 2.5, 3.5),
    ("ssprk104", 2.5, 3.5),
    ("ssprk104-frechet", 1.5, 2.5),
];
/// Band around 1e-10 for the SSPRK(5,4) smallest-step error.
pub const SSPRK54_FLOOR_BAND: (f64, f64) = (1e-11, 1e-9);

pub fn table2_methods() -> Vec<Method> {
    let mut m = Method::table2();
    m.extend(Method::fourth_order());
    m.push(Method::Slerp {
        id: SchemeId::Ssprk104,
        mode: CombineMode::ProjectedMean,
    });
    m
}

fn find<'a>(reports: &'a [ConvergenceReport], name: &str) -> &'a ConvergenceReport {
    reports
        .iter()
        .find(|r| r.method == name)
        .unwrap_or_else(|| panic!("no report for {name}"))
}

/// Fitted E₂ orders of the comparison table.
pub fn e2_order_checks(reports: &[ConvergenceReport]) -> Vec<Check> {
    TABLE2_E2_ORDERS
        .iter()
        .map(|&(name, expected)| {
            Check::new(
                format!("{name} E2 order"),
                order(find(reports, name).order_e2),
                Bound::Near {
                    target: expected,
                    tol: TABLE2_E2_TOL,
                },
            )
        })
        .collect()
}

/// E_norm orders of the Cartesian methods and E_norm of every on-sphere method.
pub fn enorm_checks(reports: &[ConvergenceReport]) -> Vec<Check> {
    let mut checks: Vec<Check> = TABLE2_ENORM_ORDERS
        .iter()
        .map(|&(name, expected)| {
            Check::new(
                format!("{name} Enorm order"),
                order(find(reports, name).order_enorm),
                Bound::Near {
                    target: expected,
                    tol: TABLE2_ENORM_TOL,
                },
            )
        })
        .collect();
    for m in table2_methods().iter().filter(|m| m.stays_on_sphere()) {
        checks.push(Check::new(
            format!("{m} max Enorm"),
            find(reports, &m.name()).max_enorm(),
            Bound::AtMost { max: ON_SPHERE_ENORM },
        ));
    }
    checks
}

/// Orders of the fourth-order SLERP attempts and the SSPRK(5,4) error floor.
pub fn fourth_order_checks(reports: &[ConvergenceReport]) -> Vec<Check> {
    let mut checks: Vec<Check> = FOURTH_ORDER_RANGES
        .iter()
        .map(|&(name, lo, hi)| {
            Check::new(
                format!("{name} E2 order"),
                order(find(reports, name).order_e2),
                Bound::Range { lo, hi },
            )
        })
        .collect();
    checks.push(Check::new(
        "ssprk104-projmean E2 order",
        order(find(reports, "ssprk104-projmean").order_e2),
        Bound::Info,
    ));
    let last = find(reports, SchemeId::Ssprk54.name()).rows.last().map_or(f64::NAN, |r| r.e2);
    checks.push(Check::new(
        "ssprk54 E2 at smallest h",
        last,
        Bound::Range {
            lo: SSPRK54_FLOOR_BAND.0,
            hi: SSPRK54_FLOOR_BAND.1,
        },
    ));
    checks
}

fn order(o: Option<f64>) -> f64 {
    o.unwrap_or(f64::NAN)
}

/// Every table check on reports covering [`table2_methods`].
pub fn table2_checks(reports: &[ConvergenceReport]) -> Vec<Check> {
    let mut checks = e2_order_checks(reports);
    checks.extend(enorm_checks(reports));
    checks.extend(fourth_order_checks(reports));
    checks
}

/// Vortex-flow convergence table (T = 2, h = 0.1·2⁻ᵏ, k = 0..5) with order checks.
pub fn verify_table2() -> Result<(Vec<ConvergenceReport>, Report)> {
    let reports = run_convergence_many(&table2_methods(), Problem::Vortex4, &default_h_list(), 2.0)?;
    let checks = table2_checks(&reports);
    Ok((
        reports,
        Report {
            target: "table2".into(),
            checks,
        },
    ))
}
