use super::{signed_volume, Mesh};
use crate::error::{Error, Result};

/// Sum of element volumes (length, area, volume).
pub fn total_volume(mesh: &Mesh) -> f64 {
    (0..mesh.elem_count()).map(|e| mesh.elem_volume(e)).sum()
}

/// Extremal planar angles (2D) or dihedral angles (3D), in degrees.
pub fn mesh_quality(mesh: &Mesh) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    match mesh.dim() {
        2 => {
            for e in 0..mesh.elem_count() {
                let p = mesh.elem_vertices(e);
                for k in 0..3 {
                    let a = angle(sub(p[(k + 1) % 3], p[k]), sub(p[(k + 2) % 3], p[k]));
                    lo = lo.min(a);
                    hi = hi.max(a);
                }
            }
        }
        3 => {
            const EDGES: [(usize, usize, usize, usize); 6] = [
                (0, 1, 2, 3),
                (0, 2, 1, 3),
                (0, 3, 1, 2),
                (1, 2, 0, 3),
                (1, 3, 0, 2),
                (2, 3, 0, 1),
            ];
            for e in 0..mesh.elem_count() {
                let p = mesh.elem_vertices(e);
                for &(a, b, c, d) in &EDGES {
                    let axis = sub(p[b], p[a]);
                    let u = reject(sub(p[c], p[a]), axis);
                    let w = reject(sub(p[d], p[a]), axis);
                    let t = angle(u, w);
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
            }
        }
        d => {
            return Err(Error::Unsupported {
                what: "quality dimension",
                value: d.to_string(),
            })
        }
    }
    Ok((lo, hi))
}

/// Moves the lowest-id vertex of each victim element toward the foot of its
/// altitude so that the remaining height is `t` times the original.
pub fn distort_mesh(mesh: &Mesh, victims: &[usize], t: f64) -> Result<Mesh> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Invalid(format!("distortion factor {t} outside (0, 1]")));
    }
    let mut out = mesh.clone();
    if t == 1.0 {
        return Ok(out);
    }
    let dim = mesh.dim();
    for &e in victims {
        if e >= mesh.elem_count() {
            return Err(Error::Invalid(format!("victim element {e} does not exist")));
        }
        let (v, foot) = altitude_foot(&out, e);
        let p = out.point(v);
        let mut moved = [0.0; 3];
        for k in 0..3 {
            moved[k] = foot[k] + t * (p[k] - foot[k]);
        }
        out.set_coord(v, &moved);
    }
    for e in 0..out.elem_count() {
        if signed_volume(dim, out.coords(), out.elem(e)) <= 0.0 {
            return Err(Error::Invalid(format!("distortion inverts element {e}")));
        }
    }
    Ok(out)
}

/// The vertex [`distort_mesh`] moves (lowest global id) and the foot of its
/// altitude on the opposite facet.
pub fn altitude_foot(mesh: &Mesh, elem: usize) -> (usize, [f64; 3]) {
    let conn = mesh.elem(elem);
    let v = *conn.iter().min().unwrap();
    let others: Vec<[f64; 3]> = conn
        .iter()
        .filter(|&&w| w != v)
        .map(|&w| mesh.point(w))
        .collect();
    (v, project_to_affine_hull(mesh.point(v), &others, mesh.dim()))
}

fn project_to_affine_hull(p: [f64; 3], pts: &[[f64; 3]], dim: usize) -> [f64; 3] {
    let o = pts[0];
    let rel = sub(p, o);
    match dim {
        1 => o,
        2 => {
            let d = sub(pts[1], o);
            let s = dot(rel, d) / dot(d, d);
            add(o, scale(d, s))
        }
        _ => {
            let n = cross(sub(pts[1], o), sub(pts[2], o));
            let s = dot(rel, n) / dot(n, n);
            sub(p, scale(n, s))
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn reject(a: [f64; 3], axis: [f64; 3]) -> [f64; 3] {
    sub(a, scale(axis, dot(a, axis) / dot(axis, axis)))
}

fn angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let c = dot(a, b) / (dot(a, a) * dot(b, b)).sqrt();
    c.clamp(-1.0, 1.0).acos().to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_box_mesh;

    #[test]
    fn equilateral_and_right_triangles() {
        let s3 = 3f64.sqrt();
        let eq = Mesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.5, s3 / 2.0], vec![0, 1, 2]).unwrap();
        let (lo, hi) = mesh_quality(&eq).unwrap();
        assert!((lo - 60.0).abs() < 1e-12 && (hi - 60.0).abs() < 1e-12);
        let rt = Mesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2]).unwrap();
        let (lo, hi) = mesh_quality(&rt).unwrap();
        assert!((lo - 45.0).abs() < 1e-12 && (hi - 90.0).abs() < 1e-12);
    }

    #[test]
    fn regular_tetrahedron_dihedral() {
        let m = Mesh::new(
            3,
            vec![
                1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0,
            ],
            vec![0, 1, 2, 3],
        )
        .unwrap();
        let expected = (1.0f64 / 3.0).acos().to_degrees();
        assert!((expected - 70.5288).abs() < 1e-4);
        let (lo, hi) = mesh_quality(&m).unwrap();
        assert!((lo - expected).abs() < 1e-10 && (hi - expected).abs() < 1e-10);
    }

    #[test]
    fn quality_rejects_1d() {
        let m = generate_box_mesh(1, 3, 0.0, 0).unwrap();
        assert!(mesh_quality(&m).is_err());
    }

    #[test]
    fn identity_distortion() {
        let m = generate_box_mesh(2, 6, 0.2, 4).unwrap();
        let d = distort_mesh(&m, &[10, 20], 1.0).unwrap();
        assert_eq!(d, m);
    }

    #[test]
    fn half_distortion_halves_area() {
        let m = Mesh::new(2, vec![0.3, 0.9, 0.0, 0.0, 1.0, 0.1], vec![0, 1, 2]).unwrap();
        let a0 = m.elem_volume(0);
        let (min0, _) = mesh_quality(&m).unwrap();
        let d = distort_mesh(&m, &[0], 0.5).unwrap();
        assert!((d.elem_volume(0) - 0.5 * a0).abs() < 1e-15);
        let (min1, _) = mesh_quality(&d).unwrap();
        assert!(min1 < min0);
    }

    #[test]
    fn sweep_min_angle_monotone_2d_and_3d() {
        for dim in [2, 3] {
            let m = generate_box_mesh(dim, 4, 0.0, 0).unwrap();
            let victim = m.elem_count() / 2;
            let mut prev = f64::INFINITY;
            for t in [1.0, 1e-1, 1e-2, 1e-3] {
                let d = distort_mesh(&m, &[victim], t).unwrap();
                let (lo, _) = mesh_quality(&d).unwrap();
                assert!(lo < prev || t == 1.0, "dim {dim} t {t}");
                prev = lo;
                assert!((0..d.elem_count()).all(|e| d.elem_volume(e) > 0.0));
            }
        }
    }

    #[test]
    fn invalid_factor() {
        let m = generate_box_mesh(2, 2, 0.0, 0).unwrap();
        assert!(distort_mesh(&m, &[0], 0.0).is_err());
        assert!(distort_mesh(&m, &[0], 1.5).is_err());
    }
}
