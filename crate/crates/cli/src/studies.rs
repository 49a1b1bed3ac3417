//! Dispatch from a normalized [`ExperimentConfig`] to the library studies.

use std::time::Instant;

use anyonlab::calogero::{calogero_pair_relative, periodicity_defect, CalogeroModel, RadialGrid};
use anyonlab::geometry::{circumradius_sum, classical_hamiltonian, Point2};
use anyonlab::hardy::{hardy_pair_analytic, hardy_rayleigh_pair, hardy_upper_bound_n3, HardyGrid, HardyTrial};
use anyonlab::pair::{relative_spectrum, study_point, PairProblem, SolveSettings, StudyOptions};
use anyonlab::tonks::{tg_states, OccupationSet};
use anyonlab::vmc::{gauge_pointwise_check, gauge_strip_energy, mc_energy, splitting_energy, AnsatzState, McSettings, Probe};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Study};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Float(x) if x.is_finite() => Some(x),
            _ => None,
        }
    }

    /// CSV cell: shortest round-trip float formatting, empty when missing.
    pub fn to_cell(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) if x.is_finite() => format!("{x:?}"),
            Value::Float(_) | Value::Missing => String::new(),
            Value::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Missing, Value::Float)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// The solver stopped before every requested pair converged.
    Partial,
    Failed,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Partial => "partial",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub values: Vec<Value>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub study: Study,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Ok)
    }
}

/// Column names for a study; the CSV file appends a `status` column.
pub fn columns(study: Study) -> &'static [&'static str] {
    match study {
        Study::Tg => &["index", "n", "energy", "occupations"],
        Study::Calogero => &["alpha", "n", "lambda", "ground_energy", "oracle_energy", "oracle_error", "periodicity_defect"],
        Study::Spectrum2d => &["alpha", "eps", "index", "eigenvalue", "shifted", "parity", "parity_expectation", "residual"],
        Study::Convergence => &[
            "alpha",
            "eps",
            "nx",
            "ny",
            "shifted",
            "deviation",
            "extrapolated",
            "overlap",
            "diagonal_mass",
            "residual",
        ],
        Study::Variational => &["occupations", "alpha", "eps", "target", "mean", "standard_error", "samples", "acceptance", "seed"],
        Study::Hardy => &["alpha", "particles", "method", "resolution", "value", "standard_error", "analytic"],
        Study::GaugeChecks => &["check", "alpha", "parameter", "value"],
    }
}

/// Columns that hold sample estimates; replays compare them within 3σ.
pub fn sampled_columns(study: Study) -> &'static [(&'static str, &'static str)] {
    match study {
        Study::Variational => &[("mean", "standard_error")],
        Study::Hardy => &[("value", "standard_error")],
        _ => &[],
    }
}

type PointResult = anyonlab::Result<(Vec<Vec<Value>>, Status)>;

struct Point {
    /// Leading columns, used for the placeholder row when the point fails.
    key: Vec<Value>,
    eval: Box<dyn Fn() -> PointResult + Send + Sync>,
}

fn occupations_text(o: &[usize]) -> String {
    o.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ")
}

fn solve_settings(c: &ExperimentConfig, k: usize) -> SolveSettings {
    SolveSettings {
        k,
        tol: c.solver.tol.unwrap_or(1e-7),
        seed: c.solver.seed.unwrap_or(2024),
        max_iter: c.solver.max_iter.unwrap_or(200_000),
    }
}

fn mc_settings(c: &ExperimentConfig) -> McSettings {
    let mut mc = McSettings::new(c.solver.seed.unwrap_or_default());
    mc.chains = c.solver.chains.unwrap_or(mc.chains);
    mc.per_chain = c.solver.samples.unwrap_or(mc.samples()) / mc.chains;
    mc
}

fn points(c: &ExperimentConfig) -> Vec<Point> {
    let c = c.clone();
    let mut out: Vec<Point> = Vec::new();
    match c.study {
        Study::Tg => {
            let (n, count) = (c.parameters.n.unwrap_or(2), c.parameters.count.unwrap_or(4));
            out.push(Point {
                key: vec![],
                eval: Box::new(move || {
                    let rows = tg_states(n, count)?
                        .into_iter()
                        .enumerate()
                        .map(|(i, (e, o))| vec![i.into(), n.into(), e.into(), occupations_text(o.levels()).into()])
                        .collect();
                    Ok((rows, Status::Ok))
                }),
            });
        }
        Study::Calogero => {
            let n = c.parameters.n.unwrap_or(2);
            for &a in c.alphas() {
                out.push(Point {
                    key: vec![a.into(), n.into()],
                    eval: Box::new(move || {
                        let m = CalogeroModel::new(n, a);
                        let (oracle, err) = if n == 2 {
                            let r = calogero_pair_relative(a, RadialGrid::default())?;
                            // centre of mass contributes 1
                            (Some(1.0 + r.energy), Some(r.error_estimate))
                        } else {
                            (None, None)
                        };
                        let row = vec![
                            a.into(),
                            n.into(),
                            m.lambda().into(),
                            m.ground_energy().into(),
                            oracle.into(),
                            err.into(),
                            periodicity_defect(a).into(),
                        ];
                        Ok((vec![row], Status::Ok))
                    }),
                });
            }
        }
        Study::Spectrum2d => {
            let (nx, ny) = c.grid().unwrap_or((160, 200));
            let lx = c.solver.half_width.unwrap_or(8.0);
            let s = solve_settings(&c, c.parameters.count.unwrap_or(4));
            for &a in c.alphas() {
                for &e in c.epsilons() {
                    out.push(Point {
                        key: vec![a.into(), e.into()],
                        eval: Box::new(move || {
                            let p = PairProblem::with_resolution(a, e, nx, ny)?;
                            let p = p.with_box(lx, p.grid.half_width.1)?;
                            let sp = relative_spectrum(&p, s)?;
                            let rows = sp
                                .states
                                .iter()
                                .enumerate()
                                .map(|(i, st)| {
                                    vec![
                                        a.into(),
                                        e.into(),
                                        i.into(),
                                        st.eigenvalue.into(),
                                        (st.eigenvalue - p.transverse_energy()).into(),
                                        Value::Int(st.parity as i64),
                                        st.parity_expectation.into(),
                                        st.residual.into(),
                                    ]
                                })
                                .collect();
                            Ok((rows, if sp.complete { Status::Ok } else { Status::Partial }))
                        }),
                    });
                }
            }
        }
        Study::Convergence => {
            let resolution = c.grid().unwrap_or((160, 200));
            let o = StudyOptions {
                resolution,
                half_width_x: c.solver.half_width.unwrap_or(8.0),
                solve: solve_settings(&c, 4),
                extrapolate: c.parameters.extrapolate.unwrap_or(true),
            };
            for &a in c.alphas() {
                for &e in c.epsilons() {
                    out.push(Point {
                        key: vec![a.into(), e.into()],
                        eval: Box::new(move || {
                            let r = study_point(a, e, o)?;
                            let row = vec![
                                a.into(),
                                e.into(),
                                r.resolution.0.into(),
                                r.resolution.1.into(),
                                r.shifted.into(),
                                r.deviation.into(),
                                r.extrapolated.into(),
                                r.overlap.into(),
                                r.diagonal_mass.into(),
                                r.residual.into(),
                            ];
                            Ok((vec![row], if r.complete { Status::Ok } else { Status::Partial }))
                        }),
                    });
                }
            }
        }
        Study::Variational => {
            let occ = c.parameters.occupations.clone().unwrap_or_default();
            let mc = mc_settings(&c);
            for &a in c.alphas() {
                for &e in c.epsilons() {
                    let occ = occ.clone();
                    out.push(Point {
                        key: vec![occupations_text(&occ).into(), a.into(), e.into()],
                        eval: Box::new(move || {
                            let st = AnsatzState::new(OccupationSet::new(occ.clone())?, a, e)?;
                            let est = mc_energy(&st, mc)?;
                            let row = vec![
                                occupations_text(&occ).into(),
                                a.into(),
                                e.into(),
                                splitting_energy(&st).into(),
                                est.mean.into(),
                                est.standard_error.into(),
                                est.samples.into(),
                                est.acceptance.into(),
                                est.seed.into(),
                            ];
                            Ok((vec![row], Status::Ok))
                        }),
                    });
                }
            }
        }
        Study::Hardy => {
            let n = c.parameters.n.unwrap_or(2);
            let mut grids = Vec::new();
            if n == 2 {
                match c.grid() {
                    Some((g, _)) => grids.push(HardyGrid::Cartesian {
                        half_width: c.solver.half_width.unwrap_or(8.0),
                        n: g,
                    }),
                    None => grids.extend(c.parameters.levels.iter().flatten().map(|&l| HardyGrid::log_polar(l))),
                }
            }
            let s = solve_settings(&c, 2);
            let mc = mc_settings(&c);
            let trial = HardyTrial {
                sigma: 1.0,
                core: c.parameters.core.unwrap_or(1.0),
                exponent: c.parameters.exponent.unwrap_or(1.0),
            };
            for &a in c.alphas() {
                if n == 2 {
                    for &g in &grids {
                        out.push(Point {
                            key: vec![a.into(), 2usize.into(), "rayleigh-grid".into(), g.describe().into()],
                            eval: Box::new(move || {
                                let h = hardy_rayleigh_pair(a, g, s)?;
                                let row = vec![
                                    a.into(),
                                    2usize.into(),
                                    "rayleigh-grid".into(),
                                    h.resolution.into(),
                                    h.value.into(),
                                    Value::Missing,
                                    hardy_pair_analytic(a).into(),
                                ];
                                Ok((vec![row], Status::Ok))
                            }),
                        });
                    }
                } else {
                    out.push(Point {
                        key: vec![a.into(), 3usize.into(), "variational-upper".into()],
                        eval: Box::new(move || {
                            let h = hardy_upper_bound_n3(a, trial, mc)?;
                            let row = vec![
                                a.into(),
                                3usize.into(),
                                "variational-upper".into(),
                                h.resolution.into(),
                                h.value.into(),
                                h.standard_error.into(),
                                Value::Missing,
                            ];
                            Ok((vec![row], Status::Ok))
                        }),
                    });
                }
            }
        }
        Study::GaugeChecks => {
            let count = c.parameters.count.unwrap_or(10_000);
            let seed = c.solver.seed.unwrap_or_default();
            for (i, &a) in c.alphas().iter().enumerate() {
                out.push(Point {
                    key: vec!["pointwise".into(), a.into()],
                    eval: Box::new(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(i as u64);
                        let mut worst: f64 = 0.0;
                        for _ in 0..count {
                            let r = Point2::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
                            if r.x == 0.0 {
                                continue;
                            }
                            for probe in [Probe::nodal_gaussian(), Probe::gaussian()] {
                                worst = worst.max(gauge_pointwise_check(a, r, &probe)?.abs());
                            }
                        }
                        let mut rows = vec![vec!["pointwise".into(), a.into(), count.into(), worst.into()]];
                        for h in [0.1, 0.05, 0.025] {
                            rows.push(vec![
                                "strip-nodal".into(),
                                a.into(),
                                h.into(),
                                gauge_strip_energy(a, &Probe::nodal_gaussian(), h)?.into(),
                            ]);
                        }
                        for h in [0.1, 0.05, 0.025] {
                            rows.push(vec![
                                "strip-nodeless".into(),
                                a.into(),
                                h.into(),
                                gauge_strip_energy(a, &Probe::gaussian(), h)?.into(),
                            ]);
                        }
                        Ok((rows, Status::Ok))
                    }),
                });
            }
            out.push(Point {
                key: vec!["circumradius".into()],
                eval: Box::new(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(u64::MAX);
                    let mut pt = || Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                    let mut worst: f64 = 0.0;
                    let mut done = 0usize;
                    while done < count {
                        let (p, q, s) = (pt(), pt(), pt());
                        let (a, b, c) = ((q - s).norm(), (p - s).norm(), (p - q).norm());
                        let area = 0.5 * (q - p).cross(s - p).abs();
                        if area <= 1e-3 * (a * b).max(b * c).max(a * c) {
                            continue;
                        }
                        let r = a * b * c / (4.0 * area);
                        let want = 1.0 / (2.0 * r * r);
                        worst = worst.max((circumradius_sum(p, q, s)? - want).abs() / want);
                        done += 1;
                    }
                    let mut line: f64 = 0.0;
                    for n in 2..=6 {
                        for _ in 0..count / 5 {
                            let pos: Vec<Point2> = (0..n).map(|k| Point2::new(k as f64 + rng.random_range(0.1..0.9), 0.0)).collect();
                            let mom: Vec<Point2> = (0..n).map(|_| Point2::new(rng.random_range(-2.0..2.0), 0.0)).collect();
                            let e = classical_hamiltonian(&pos, &mom, 0.7)?;
                            line = line.max(e.cross.abs()).max(e.three_body.abs());
                        }
                    }
                    Ok((
                        vec![
                            vec!["circumradius".into(), Value::Missing, count.into(), worst.into()],
                            vec!["collinear".into(), Value::Missing, 6usize.into(), line.into()],
                        ],
                        Status::Ok,
                    ))
                }),
            });
        }
    }
    out
}

/// Run every parameter point of the study on a pool of `workers` threads.
/// Rows follow config order regardless of completion order.
pub fn run_study(c: &ExperimentConfig, workers: usize) -> Table {
    let cols = columns(c.study);
    let pts = points(c);
    let eval = |p: &Point| -> Vec<Row> {
        let t = Instant::now();
        let out = (p.eval)();
        let runtime_s = t.elapsed().as_secs_f64();
        match out {
            Ok((rows, status)) => rows
                .into_iter()
                .map(|values| Row {
                    values,
                    status,
                    message: None,
                    runtime_s,
                })
                .collect(),
            Err(e) => {
                let mut values = p.key.clone();
                values.resize(cols.len(), Value::Missing);
                vec![Row {
                    values,
                    status: Status::Failed,
                    message: Some(e.to_string()),
                    runtime_s,
                }]
            }
        }
    };
    let rows: Vec<Vec<Row>> = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| pts.par_iter().map(eval).collect()),
        Err(_) => pts.iter().map(eval).collect(),
    };
    Table {
        study: c.study,
        columns: cols.iter().map(|s| s.to_string()).collect(),
        rows: rows.into_iter().flatten().collect(),
    }
}
