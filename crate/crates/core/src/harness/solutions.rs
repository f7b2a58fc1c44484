use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::assembly::{PdeSpec, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionName {
    /// `c x^3 (1 - x^3) y^3 (1 - y^3) ...`, with `c = 4^dim`.
    U1,
    /// `prod cos(pi x_k)`.
    U2,
    /// `sinh(pi x) prod_{k>0} cosh(pi x_k)`, normalized to 1 at the far corner.
    U3,
    /// `cos(pi/2 |x|^2)`, zero on the unit sphere.
    U4,
    /// `e^x sin(pi x)` on the unit interval.
    Smooth1d,
}

impl FromStr for SolutionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "u1" => SolutionName::U1,
            "u2" => SolutionName::U2,
            "u3" => SolutionName::U3,
            "u4" => SolutionName::U4,
            "smooth1d" => SolutionName::Smooth1d,
            _ => {
                return Err(Error::Unsupported {
                    what: "manufactured solution",
                    value: s.to_string(),
                })
            }
        })
    }
}

impl fmt::Display for SolutionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionName::U1 => "u1",
            SolutionName::U2 => "u2",
            SolutionName::U3 => "u3",
            SolutionName::U4 => "u4",
            SolutionName::Smooth1d => "smooth1d",
        })
    }
}

/// Closed-form solution with its gradient and Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub name: SolutionName,
    pub dim: usize,
}

pub fn manufactured(name: SolutionName, dim: usize) -> Result<ManufacturedSolution> {
    let ok = match name {
        SolutionName::U1 | SolutionName::U2 | SolutionName::U3 => (1..=3).contains(&dim),
        SolutionName::U4 => dim == 2 || dim == 3,
        SolutionName::Smooth1d => dim == 1,
    };
    if !ok {
        return Err(Error::Unsupported {
            what: "solution/dimension pair",
            value: format!("{name} in {dim}D"),
        });
    }
    Ok(ManufacturedSolution { name, dim })
}

fn u1_factor(t: f64) -> (f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (t3 - t3 * t3, 3.0 * t2 - 6.0 * t2 * t3, 6.0 * t - 30.0 * t2 * t2)
}

impl ManufacturedSolution {
    pub fn value(&self, x: &[f64; 3]) -> f64 {
        let d = self.dim;
        match self.name {
            SolutionName::U1 => (0..d).map(|k| 4.0 * u1_factor(x[k]).0).product(),
            SolutionName::U2 => (0..d).map(|k| (PI * x[k]).cos()).product(),
            SolutionName::U3 => u3_parts(x, d).0,
            SolutionName::U4 => (0.5 * PI * r2(x, d)).cos(),
            SolutionName::Smooth1d => x[0].exp() * (PI * x[0]).sin(),
        }
    }

    pub fn gradient(&self, x: &[f64; 3]) -> [f64; 3] {
        let d = self.dim;
        let mut g = [0.0; 3];
        match self.name {
            SolutionName::U1 => {
                let f: Vec<_> = (0..d).map(|k| u1_factor(x[k])).collect();
                for k in 0..d {
                    g[k] = (0..d).map(|l| 4.0 * if l == k { f[l].1 } else { f[l].0 }).product();
                }
            }
            SolutionName::U2 => {
                for k in 0..d {
                    g[k] = (0..d)
                        .map(|l| {
                            if l == k {
                                -PI * (PI * x[l]).sin()
                            } else {
                                (PI * x[l]).cos()
                            }
                        })
                        .product();
                }
            }
            SolutionName::U3 => {
                let (_, norm) = u3_parts(x, d);
                for k in 0..d {
                    let mut p = PI / norm;
                    for l in 0..d {
                        let s = PI * x[l];
                        p *= match (l == 0, l == k) {
                            (true, true) => s.cosh(),
                            (true, false) => s.sinh(),
                            (false, true) => s.sinh(),
                            (false, false) => s.cosh(),
                        };
                    }
                    g[k] = p;
                }
            }
            SolutionName::U4 => {
                let s = -PI * (0.5 * PI * r2(x, d)).sin();
                for k in 0..d {
                    g[k] = s * x[k];
                }
            }
            SolutionName::Smooth1d => {
                let e = x[0].exp();
                g[0] = e * ((PI * x[0]).sin() + PI * (PI * x[0]).cos());
            }
        }
        g
    }

    pub fn laplacian(&self, x: &[f64; 3]) -> f64 {
        let d = self.dim;
        match self.name {
            SolutionName::U1 => {
                let f: Vec<_> = (0..d).map(|k| u1_factor(x[k])).collect();
                (0..d)
                    .map(|k| (0..d).map(|l| 4.0 * if l == k { f[l].2 } else { f[l].0 }).product::<f64>())
                    .sum()
            }
            SolutionName::U2 => -(d as f64) * PI * PI * self.value(x),
            SolutionName::U3 => d as f64 * PI * PI * self.value(x),
            SolutionName::U4 => {
                let s = 0.5 * PI * r2(x, d);
                -PI * (d as f64 * s.sin() + PI * r2(x, d) * s.cos())
            }
            SolutionName::Smooth1d => {
                let e = x[0].exp();
                let (s, c) = (PI * x[0]).sin_cos();
                e * (s + 2.0 * PI * c - PI * PI * s)
            }
        }
    }

    /// `-lap U + c . grad U`.
    pub fn rho(&self, x: &[f64; 3], velocity: Option<[f64; 3]>) -> f64 {
        let mut r = -self.laplacian(x);
        if let Some(c) = velocity {
            let g = self.gradient(x);
            r += (0..self.dim).map(|k| c[k] * g[k]).sum::<f64>();
        }
        r
    }

    pub fn value_field(&self) -> ScalarField {
        let s = *self;
        Arc::new(move |x| s.value(x))
    }

    pub fn poisson(&self) -> PdeSpec {
        let s = *self;
        PdeSpec::poisson(Arc::new(move |x| s.rho(x, None)), self.value_field())
    }

    pub fn convection_diffusion(&self, velocity: [f64; 3]) -> PdeSpec {
        let s = *self;
        PdeSpec::convection_diffusion(velocity, Arc::new(move |x| s.rho(x, Some(velocity))), self.value_field())
    }
}

fn r2(x: &[f64; 3], d: usize) -> f64 {
    (0..d).map(|k| x[k] * x[k]).sum()
}

fn u3_parts(x: &[f64; 3], d: usize) -> (f64, f64) {
    let norm = PI.sinh() * PI.cosh().powi(d as i32 - 1);
    let mut v = (PI * x[0]).sinh();
    for k in 1..d {
        v *= (PI * x[k]).cosh();
    }
    (v / norm, norm)
}
