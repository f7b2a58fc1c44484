//! Quadrature on linear simplices.
//!
//! Rules are conical products of Gauss-Legendre rules pulled back through
//! the collapsed (Duffy) map of the unit square/cube onto the reference
//! simplex. All weights are positive and every point is interior. Rules are
//! built once per `(dim, exactness)` and cached.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub const MAX_EXACTNESS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub exactness: usize,
    /// Barycentric coordinates; only the first `dim + 1` entries are used.
    pub points: Vec<[f64; 4]>,
    /// Weights sum to the reference volume `1 / dim!`.
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn reference_volume(dim: usize) -> f64 {
    match dim {
        1 => 1.0,
        2 => 0.5,
        3 => 1.0 / 6.0,
        _ => panic!("dimension {dim}"),
    }
}

/// Rule on the reference simplex integrating every polynomial of total
/// degree `<= exactness` exactly.
pub fn simplex_rule(dim: usize, exactness: usize) -> Result<&'static QuadratureRule> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Unsupported {
            what: "quadrature dimension",
            value: dim.to_string(),
        });
    }
    if !(1..=MAX_EXACTNESS).contains(&exactness) {
        return Err(Error::Unsupported {
            what: "quadrature exactness",
            value: exactness.to_string(),
        });
    }
    static RULES: [[OnceLock<QuadratureRule>; MAX_EXACTNESS]; 3] =
        [const { [const { OnceLock::new() }; MAX_EXACTNESS] }; 3];
    Ok(RULES[dim - 1][exactness - 1].get_or_init(|| build_rule(dim, exactness)))
}

fn build_rule(dim: usize, p: usize) -> QuadratureRule {
    // Points needed along a collapsed direction whose integrand has degree `deg`.
    let gauss_for = |deg: usize| gauss_legendre_01(deg / 2 + 1);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    if p == 1 {
        let c = 1.0 / (dim as f64 + 1.0);
        let mut b = [0.0; 4];
        b[..=dim].fill(c);
        return QuadratureRule {
            dim,
            exactness: 1,
            points: vec![b],
            weights: vec![reference_volume(dim)],
        };
    }
    match dim {
        1 => {
            for (x, w) in gauss_for(p) {
                points.push([1.0 - x, x, 0.0, 0.0]);
                weights.push(w);
            }
        }
        2 => {
            let gs = gauss_for(p + 1);
            let gt = gauss_for(p);
            for &(s, ws) in &gs {
                for &(t, wt) in &gt {
                    let x = s;
                    let y = (1.0 - s) * t;
                    points.push([1.0 - x - y, x, y, 0.0]);
                    weights.push(ws * wt * (1.0 - s));
                }
            }
        }
        _ => {
            let gs = gauss_for(p + 2);
            let gt = gauss_for(p + 1);
            let gr = gauss_for(p);
            for &(s, ws) in &gs {
                for &(t, wt) in &gt {
                    for &(r, wr) in &gr {
                        let x = s;
                        let y = (1.0 - s) * t;
                        let z = (1.0 - s) * (1.0 - t) * r;
                        points.push([1.0 - x - y - z, x, y, z]);
                        weights.push(ws * wt * wr * (1.0 - s) * (1.0 - s) * (1.0 - t));
                    }
                }
            }
        }
    }
    QuadratureRule {
        dim,
        exactness: p,
        points,
        weights,
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, by Newton iteration on the
/// Legendre polynomial.
fn gauss_legendre_01(q: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(q);
    for i in 0..q {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Exact rational number with `u128` parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u128,
    pub den: u128,
}

impl Rational {
    pub fn new(num: u128, den: u128) -> Self {
        let g = gcd(num, den);
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// `int_T u^a du = (prod a_i!) / (sum a_i + dim)!` over the reference simplex.
pub fn monomial_simplex_integral(dim: usize, exponents: &[u32]) -> Rational {
    assert_eq!(exponents.len(), dim);
    let total: u32 = exponents.iter().sum();
    assert!(total <= 20, "total degree {total} exceeds 20");
    let fact = |n: u32| (1..=n as u128).product::<u128>();
    let num = exponents.iter().map(|&a| fact(a)).product();
    Rational::new(num, fact(total + dim as u32))
}

/// Affine map from the reference simplex onto one element.
#[derive(Debug, Clone)]
pub struct SimplexMap {
    pub vertices: Vec<[f64; 3]>,
    /// `|det J| = volume / reference volume`.
    pub det: f64,
}

impl SimplexMap {
    pub fn new(mesh: &Mesh, elem: usize) -> Result<Self> {
        let vol = mesh.elem_volume(elem);
        if vol <= 0.0 || !vol.is_finite() {
            return Err(Error::DegenerateElement(elem));
        }
        Ok(SimplexMap {
            vertices: mesh.elem_vertices(elem),
            det: vol / reference_volume(mesh.dim()),
        })
    }

    pub fn point(&self, bary: &[f64; 4]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (b, v) in bary.iter().zip(&self.vertices) {
            for k in 0..3 {
                x[k] += b * v[k];
            }
        }
        x
    }
}

pub fn integrate_on_element<F>(mesh: &Mesh, elem: usize, rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> f64,
{
    if rule.dim != mesh.dim() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dim(),
            got: rule.dim,
        });
    }
    let map = SimplexMap::new(mesh, elem)?;
    Ok(map.det
        * rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(b, w)| w * f(&map.point(b)))
            .sum::<f64>())
}
