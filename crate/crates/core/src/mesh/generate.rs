use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{signed_volume, Mesh};
use crate::error::{Error, Result};

const MAX_RESAMPLES: usize = 100;

/// Structured simplicial mesh of the unit interval, square or cube.
///
/// Each grid cell is split into 1 segment, 2 triangles (along the
/// `(0,0)-(1,1)` diagonal) or 6 tetrahedra (Kuhn split along the main
/// diagonal). Interior nodes are displaced by independent uniform offsets of
/// magnitude at most `perturb / divisions` per coordinate; the offset of a
/// node is resampled if it would invert an incident element.
pub fn generate_box_mesh(dim: usize, divisions: usize, perturb: f64, seed: u64) -> Result<Mesh> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Unsupported {
            what: "dimension",
            value: dim.to_string(),
        });
    }
    if divisions == 0 {
        return Err(Error::Invalid("divisions must be at least 1".into()));
    }
    if !(0.0..0.4).contains(&perturb) {
        return Err(Error::Invalid(format!(
            "perturbation {perturb} outside [0, 0.4)"
        )));
    }
    let n1 = divisions + 1;
    let h = 1.0 / divisions as f64;
    let node_count = n1.pow(dim as u32);
    let mut coords = Vec::with_capacity(node_count * dim);
    let id = |i: usize, j: usize, k: usize| i + n1 * (j + n1 * k);
    let grid = |i: usize| {
        if i == divisions {
            1.0
        } else {
            i as f64 * h
        }
    };
    let mut elems = Vec::new();
    match dim {
        1 => {
            coords.extend((0..n1).map(grid));
            for i in 0..divisions {
                elems.extend([i, i + 1]);
            }
        }
        2 => {
            for j in 0..n1 {
                for i in 0..n1 {
                    coords.extend([grid(i), grid(j)]);
                }
            }
            for j in 0..divisions {
                for i in 0..divisions {
                    let (v00, v10, v01, v11) =
                        (id(i, j, 0), id(i + 1, j, 0), id(i, j + 1, 0), id(i + 1, j + 1, 0));
                    elems.extend([v00, v10, v11, v00, v11, v01]);
                }
            }
        }
        _ => {
            for k in 0..n1 {
                for j in 0..n1 {
                    for i in 0..n1 {
                        coords.extend([grid(i), grid(j), grid(k)]);
                    }
                }
            }
            const PERMS: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            for k in 0..divisions {
                for j in 0..divisions {
                    for i in 0..divisions {
                        for perm in PERMS {
                            let mut c = [i, j, k];
                            let mut tet = [id(c[0], c[1], c[2]); 4];
                            for (s, &axis) in perm.iter().enumerate() {
                                c[axis] += 1;
                                tet[s + 1] = id(c[0], c[1], c[2]);
                            }
                            elems.extend(tet);
                        }
                    }
                }
            }
        }
    }

    let mut mesh = Mesh::new(dim, coords, elems)?;
    if perturb > 0.0 {
        perturb_interior(&mut mesh, perturb * h, seed)?;
    }
    Ok(mesh)
}

fn perturb_interior(mesh: &mut Mesh, amplitude: f64, seed: u64) -> Result<()> {
    let dim = mesh.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); mesh.node_count()];
    for e in 0..mesh.elem_count() {
        for &v in mesh.elem(e) {
            incident[v].push(e);
        }
    }
    let interior: Vec<usize> = mesh.interior_nodes().collect();
    for v in interior {
        let orig = mesh.coord(v).to_vec();
        let mut ok = false;
        for _ in 0..MAX_RESAMPLES {
            let moved: Vec<f64> = orig
                .iter()
                .map(|&x| x + rng.gen_range(-amplitude..=amplitude))
                .collect();
            mesh.set_coord(v, &moved);
            if incident[v]
                .iter()
                .all(|&e| signed_volume(dim, mesh.coords(), mesh.elem(e)) > 0.0)
            {
                ok = true;
                break;
            }
        }
        if !ok {
            mesh.set_coord(v, &orig);
            return Err(Error::PerturbationFailed(MAX_RESAMPLES));
        }
    }
    Ok(())
}

/// Triangulation of the unit disc by concentric circles.
///
/// Circle `k` (radius `k / rings`) carries `6k` equally spaced nodes; the
/// annulus between consecutive circles is stitched sector by sector.
pub fn generate_disc_mesh(rings: usize) -> Result<Mesh> {
    if rings == 0 {
        return Err(Error::Invalid("rings must be at least 1".into()));
    }
    let mut coords = vec![0.0, 0.0];
    // first node id on circle k
    let start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    for k in 1..=rings {
        let r = if k == rings {
            1.0
        } else {
            k as f64 / rings as f64
        };
        let count = 6 * k;
        for i in 0..count {
            let theta = 2.0 * PI * i as f64 / count as f64;
            coords.extend([r * theta.cos(), r * theta.sin()]);
        }
    }
    let mut elems = Vec::new();
    for k in 1..=rings {
        let outer = |i: usize| start(k) + i % (6 * k);
        let inner = |i: usize| {
            if k == 1 {
                0
            } else {
                start(k - 1) + i % (6 * (k - 1))
            }
        };
        let ni = k - 1;
        for s in 0..6 {
            let (mut a, mut b) = (0usize, 0usize);
            while a < ni || b < k {
                // Advance along the circle whose next node comes first in angle.
                let advance_outer = if a == ni {
                    true
                } else if b == k {
                    false
                } else {
                    (b + 1) * ni <= (a + 1) * k
                };
                let ia = s * ni + a;
                let ob = s * k + b;
                if advance_outer {
                    elems.extend([inner(ia), outer(ob), outer(ob + 1)]);
                    b += 1;
                } else {
                    elems.extend([inner(ia), outer(ob), inner(ia + 1)]);
                    a += 1;
                }
            }
        }
    }
    Mesh::new(2, coords, elems)
}

/// 1D mesh of `[0, 1]` whose cells alternate between lengths `L` and
/// `L / ratio`. `ratio = 1` yields a uniform grid.
pub fn graded_interval_mesh(cells: usize, ratio: f64) -> Result<Mesh> {
    if cells == 0 || ratio <= 0.0 {
        return Err(Error::Invalid(format!(
            "invalid graded mesh: cells {cells}, ratio {ratio}"
        )));
    }
    let long = cells.div_ceil(2) as f64;
    let short = (cells / 2) as f64;
    let l = 1.0 / (long + short / ratio);
    let mut coords = Vec::with_capacity(cells + 1);
    let mut x = 0.0;
    coords.push(x);
    for c in 0..cells {
        x += if c % 2 == 0 { l } else { l / ratio };
        coords.push(if c + 1 == cells { 1.0 } else { x });
    }
    let elems = (0..cells).flat_map(|c| [c, c + 1]).collect();
    Mesh::new(1, coords, elems)
}
