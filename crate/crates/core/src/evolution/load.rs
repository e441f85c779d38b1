use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::BoundaryProgram;
use serde::{Deserialize, Serialize};

pub type Affine = ([[f64; 2]; 2], [f64; 2]);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedKnot {
    pub t: f64,
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
}

/// Boundary datum presets. All of them are affine in x, so their strain is uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LoadKind {
    Zero,
    /// g(t, x) = t·A x.
    Stretch {
        a: [[f64; 2]; 2],
    },
    /// g(t, x) = t·(rate·(x₂ − y0), 0).
    Shear {
        rate: f64,
        y0: f64,
    },
    /// g(t, x) = t·(0, rate·(x₂ − y0)): opening across the line x₂ = y0.
    ModeI {
        rate: f64,
        y0: f64,
    },
    /// g(t, x) = A(t)x + b(t), linear between knots and constant outside them.
    Tabulated {
        knots: Vec<TabulatedKnot>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadProgram {
    pub kind: LoadKind,
    pub t_end: f64,
    pub n_steps: usize,
}

impl LoadProgram {
    pub fn new(kind: LoadKind, t_end: f64, n_steps: usize) -> Result<Self> {
        let p = LoadProgram {
            kind,
            t_end,
            n_steps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| {
            Err(Error::Validation {
                key: key.into(),
                reason,
            })
        };
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", format!("{} must be positive", self.t_end));
        }
        if self.n_steps == 0 {
            return bad("delta", "at least one time step is needed".into());
        }
        if let LoadKind::Tabulated { knots } = &self.kind {
            if knots.is_empty() {
                return bad("load_table", "needs at least one knot".into());
            }
            if knots.windows(2).any(|w| !(w[1].t > w[0].t)) {
                return bad("load_table", "knot times must increase strictly".into());
            }
            let finite = knots.iter().all(|k| {
                k.t.is_finite() && k.a.iter().flatten().chain(&k.b).all(|x| x.is_finite())
            });
            if !finite {
                return bad("load_table", "entries must be finite".into());
            }
        }
        Ok(())
    }

    /// δ = T_end / n_steps.
    pub fn delta(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            k as f64 * self.delta()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }

    /// (A(t), b(t)) with g(t, x) = A(t)x + b(t).
    pub fn affine(&self, t: f64) -> Affine {
        match &self.kind {
            LoadKind::Zero => ([[0.0; 2]; 2], [0.0; 2]),
            LoadKind::Stretch { a } => (scale(a, t), [0.0; 2]),
            LoadKind::Shear { rate, y0 } => ([[0.0, t * rate], [0.0, 0.0]], [-t * rate * y0, 0.0]),
            LoadKind::ModeI { rate, y0 } => ([[0.0, 0.0], [0.0, t * rate]], [0.0, -t * rate * y0]),
            LoadKind::Tabulated { knots } => {
                let first = &knots[0];
                let last = &knots[knots.len() - 1];
                if t <= first.t {
                    return (first.a, first.b);
                }
                if t >= last.t {
                    return (last.a, last.b);
                }
                let i = knots.partition_point(|k| k.t <= t) - 1;
                let (k0, k1) = (&knots[i], &knots[i + 1]);
                let s = (t - k0.t) / (k1.t - k0.t);
                let mut a = [[0.0; 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        a[r][c] = (1.0 - s) * k0.a[r][c] + s * k1.a[r][c];
                    }
                }
                (
                    a,
                    [
                        (1.0 - s) * k0.b[0] + s * k1.b[0],
                        (1.0 - s) * k0.b[1] + s * k1.b[1],
                    ],
                )
            }
        }
    }

    /// (∂ₜA, ∂ₜb); the right derivative at tabulated knots.
    pub fn affine_rate(&self, t: f64) -> Affine {
        match &self.kind {
            LoadKind::Zero => ([[0.0; 2]; 2], [0.0; 2]),
            LoadKind::Stretch { a } => (*a, [0.0; 2]),
            LoadKind::Shear { rate, y0 } => ([[0.0, *rate], [0.0, 0.0]], [-rate * y0, 0.0]),
            LoadKind::ModeI { rate, y0 } => ([[0.0, 0.0], [0.0, *rate]], [0.0, -rate * y0]),
            LoadKind::Tabulated { knots } => {
                if t < knots[0].t || t >= knots[knots.len() - 1].t {
                    return ([[0.0; 2]; 2], [0.0; 2]);
                }
                let i = knots.partition_point(|k| k.t <= t) - 1;
                let (k0, k1) = (&knots[i], &knots[i + 1]);
                let h = k1.t - k0.t;
                let mut a = [[0.0; 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        a[r][c] = (k1.a[r][c] - k0.a[r][c]) / h;
                    }
                }
                (a, [(k1.b[0] - k0.b[0]) / h, (k1.b[1] - k0.b[1]) / h])
            }
        }
    }

    pub fn g(&self, t: f64, x: Point) -> [f64; 2] {
        apply(&self.affine(t), x)
    }

    pub fn dg_dt(&self, t: f64, x: Point) -> [f64; 2] {
        apply(&self.affine_rate(t), x)
    }
}

impl BoundaryProgram for LoadProgram {
    fn displacement(&self, t: f64, x: Point) -> [f64; 2] {
        self.g(t, x)
    }
}

fn scale(a: &[[f64; 2]; 2], s: f64) -> [[f64; 2]; 2] {
    [[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]]
}

fn apply((a, b): &Affine, x: Point) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1] + b[0],
        a[1][0] * x[0] + a[1][1] * x[1] + b[1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_their_derivatives() {
        let kinds = [
            LoadKind::Stretch {
                a: [[1.0, 0.5], [0.0, -0.2]],
            },
            LoadKind::Shear { rate: 0.3, y0: 0.5 },
            LoadKind::ModeI {
                rate: 0.7,
                y0: 0.25,
            },
            LoadKind::Tabulated {
                knots: vec![
                    TabulatedKnot {
                        t: 0.0,
                        a: [[0.0; 2]; 2],
                        b: [0.0; 2],
                    },
                    TabulatedKnot {
                        t: 0.5,
                        a: [[0.2, 0.0], [0.1, 0.0]],
                        b: [0.01, 0.0],
                    },
                    TabulatedKnot {
                        t: 1.0,
                        a: [[0.2, 0.0], [0.1, 0.4]],
                        b: [0.0, 0.0],
                    },
                ],
            },
        ];
        let x = [0.3, 0.8];
        for kind in kinds {
            let p = LoadProgram::new(kind, 1.0, 10).unwrap();
            for t in [0.1, 0.3, 0.7] {
                let h = 1e-6;
                let a = p.g(t + h, x);
                let b = p.g(t - h, x);
                let d = p.dg_dt(t, x);
                for c in 0..2 {
                    assert!(((a[c] - b[c]) / (2.0 * h) - d[c]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn mode_i_opens_across_its_line() {
        let p = LoadProgram::new(LoadKind::ModeI { rate: 2.0, y0: 0.5 }, 1.0, 4).unwrap();
        assert_eq!(p.g(0.5, [0.3, 0.5]), [0.0, 0.0]);
        assert_eq!(p.g(0.5, [0.3, 1.0]), [0.0, 0.5]);
        assert_eq!(p.g(0.5, [0.3, 0.0]), [0.0, -0.5]);
    }

    #[test]
    fn time_grid_ends_exactly() {
        let p = LoadProgram::new(LoadKind::Zero, 0.3, 7).unwrap();
        let ts = p.times();
        assert_eq!(ts.len(), 8);
        assert_eq!(ts[7], 0.3);
        assert!(LoadProgram::new(LoadKind::Zero, 1.0, 0).is_err());
    }
}
