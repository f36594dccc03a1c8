use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{GridFunction, Manifold, Point, QuadratureGrid, SpectralField};
use crate::error::{Checked, Error, Result};

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect()
}

fn wrap(s: i32, a: usize, n: usize) -> usize {
    (s as i64 * a as i64).rem_euclid(n as i64) as usize
}

/// Signature -> list of (radial index, coefficient), plus the largest index.
type Groups = BTreeMap<[i32; 2], (u32, Vec<(u32, Complex64)>)>;

fn group(field: &SpectralField) -> Groups {
    let mut groups: Groups = BTreeMap::new();
    for (mode, &c) in field.iter() {
        let (sig, idx) = mode.split();
        let entry = groups.entry(sig).or_insert((0, Vec::new()));
        entry.0 = entry.0.max(idx);
        entry.1.push((idx, c));
    }
    groups
}

fn check_manifold(a: &Manifold, b: &Manifold) -> Result<()> {
    if a != b {
        return Err(Error::Mismatch(format!("field on {a:?}, grid on {b:?}")));
    }
    Ok(())
}

/// Samples a field on the grid nodes.
///
/// Flagged when the grid's exactness is below the field degree, or when a
/// reduced grid is asked to represent more than one torus signature.
pub fn synthesize<'g>(
    field: &SpectralField,
    grid: &'g QuadratureGrid,
) -> Result<Checked<GridFunction<'g>>> {
    check_manifold(field.manifold(), grid.manifold())?;
    let flagged = field.max_degree() > grid.exactness()
        || (grid.is_reduced() && field.signatures().len() > 1);
    let manifold = *grid.manifold();
    let [n0, n1] = grid.azimuth_counts();
    let (tw0, tw1) = (twiddles(n0), twiddles(n1));
    let groups = group(field);
    let mut by_s0: BTreeMap<i32, Vec<[i32; 2]>> = BTreeMap::new();
    for sig in groups.keys() {
        by_s0.entry(sig[0]).or_default().push(*sig);
    }
    let per_ring = n0 * n1;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    values
        .par_chunks_mut(per_ring)
        .zip(grid.polar_nodes().par_iter())
        .for_each(|(ring, &x)| {
            let mut h = vec![Complex64::new(0.0, 0.0); n1];
            for (&s0, sigs) in &by_s0 {
                h.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for sig in sigs {
                    let (max_idx, coeffs) = &groups[sig];
                    let col = manifold.radial_column(*sig, *max_idx, x);
                    let r: Complex64 = coeffs.iter().map(|&(i, c)| c * col[i as usize]).sum();
                    for (a1, hv) in h.iter_mut().enumerate() {
                        *hv += r * tw1[wrap(sig[1], a1, n1)];
                    }
                }
                for a0 in 0..n0 {
                    let t = tw0[wrap(s0, a0, n0)];
                    for (a1, hv) in h.iter().enumerate() {
                        ring[a0 * n1 + a1] += t * hv;
                    }
                }
            }
        });
    Ok(Checked::flagged(GridFunction::new(grid, values)?, flagged))
}

/// Projects grid samples onto every basis mode of degree at most `max_degree`.
///
/// Flagged when the grid does not integrate degree `2 * max_degree` exactly,
/// and always on reduced grids of manifolds with azimuthal angles.
pub fn analyze(values: &GridFunction<'_>, max_degree: u32) -> Result<Checked<SpectralField>> {
    let grid = values.grid();
    let manifold = *grid.manifold();
    let flagged = grid.exactness() < 2 * max_degree || grid.is_reduced();
    let [n0, n1] = grid.azimuth_counts();
    let (tw0, tw1) = (twiddles(n0), twiddles(n1));
    let modes = manifold.modes_up_to(max_degree);
    let mut sigs: BTreeMap<[i32; 2], (u32, Vec<usize>)> = BTreeMap::new();
    for (pos, mode) in modes.iter().enumerate() {
        let (sig, idx) = mode.split();
        let e = sigs.entry(sig).or_insert((0, Vec::new()));
        e.0 = e.0.max(idx);
        e.1.push(pos);
    }
    let mut s0s: Vec<i32> = sigs.keys().map(|s| s[0]).collect();
    s0s.dedup();
    let per_ring = n0 * n1;
    let partials: Vec<Vec<Complex64>> = values
        .values()
        .par_chunks(per_ring)
        .enumerate()
        .map(|(ix, ring)| {
            let x = grid.polar_nodes()[ix];
            let w = grid.ring_weight(ix);
            let mut acc = vec![Complex64::new(0.0, 0.0); modes.len()];
            let mut h = vec![Complex64::new(0.0, 0.0); n1];
            for &s0 in &s0s {
                for (a1, hv) in h.iter_mut().enumerate() {
                    *hv = (0..n0)
                        .map(|a0| tw0[wrap(s0, a0, n0)].conj() * ring[a0 * n1 + a1])
                        .sum();
                }
                for (sig, (max_idx, positions)) in sigs.range([s0, i32::MIN]..=[s0, i32::MAX]) {
                    let f: Complex64 =
                        h.iter().enumerate().map(|(a1, hv)| tw1[wrap(sig[1], a1, n1)].conj() * hv).sum();
                    let col = manifold.radial_column(*sig, *max_idx, x);
                    for &pos in positions {
                        let idx = modes[pos].split().1 as usize;
                        acc[pos] += w * f * col[idx];
                    }
                }
            }
            acc
        })
        .collect();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); modes.len()];
    for part in partials {
        for (c, p) in coeffs.iter_mut().zip(part) {
            *c += p;
        }
    }
    let field = SpectralField::from_modes(manifold, modes.into_iter().zip(coeffs))?;
    Ok(Checked::flagged(field, flagged))
}

/// Value of a field at a single point.
pub fn evaluate(field: &SpectralField, point: Point) -> Result<Complex64> {
    let manifold = *field.manifold();
    let ok = matches!(
        (manifold, point),
        (Manifold::S2 { .. }, Point::S2 { .. })
            | (Manifold::S3, Point::S3 { .. })
            | (Manifold::S2xS1 { .. }, Point::S2xS1 { .. })
            | (Manifold::Zonal { .. }, Point::Zonal { .. })
    );
    if !ok {
        return Err(Error::Mismatch(format!("{point:?} is not a point of {manifold:?}")));
    }
    let (x, angles) = point.parts();
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("polar variable {x} outside [-1, 1]")));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (sig, (max_idx, coeffs)) in group(field) {
        let col = manifold.radial_column(sig, max_idx, x);
        let r: Complex64 = coeffs.iter().map(|&(i, c)| c * col[i as usize]).sum();
        let phase = sig[0] as f64 * angles[0] + sig[1] as f64 * angles[1];
        total += r * Complex64::from_polar(1.0, phase);
    }
    Ok(total)
}
