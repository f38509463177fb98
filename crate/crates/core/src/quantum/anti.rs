//! Antidistinguishability witnesses.
//!
//! Qubits admit an exact Bloch-space criterion: antidistinguishable qubit
//! states must be pure, the witnessing measurement has the form
//! M(j) = (t_j/2)(1 − r_j·σ), and feasibility reduces to finding weights
//! t_j > 0 with Σt_j = 2 and Σt_j r_j = 0. In higher dimension the witness
//! search runs alternating projections between the affine constraint set and
//! the PSD cone; a result counts only if every constraint holds within EPS,
//! so `None` is a semi-decision there (except where the n > d² bound or the
//! purity theorem applies).

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

use super::{cid, cx, herm_eigenvalues, product_trace, CMat, DensityOperator, Povm, EPS};

fn common_dim(states: &[DensityOperator]) -> Result<usize> {
    let Some(first) = states.first() else {
        return Err(Error::Domain("need at least two states".into()));
    };
    if states.len() < 2 {
        return Err(Error::Domain("need at least two states".into()));
    }
    let d = first.dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::Shape("states have mixed dimensions".into()));
    }
    Ok(d)
}

/// POVM with tr[ρ_j M(j)] = 0 for every j, or `None`.
pub fn is_antidistinguishable(states: &[DensityOperator]) -> Result<Option<Povm>> {
    let d = common_dim(states)?;
    if d == 2 {
        return qubit_antidistinguish(states, None);
    }
    let n = states.len();
    let targets: Vec<(usize, usize, f64)> = (0..n).map(|j| (j, j, 0.0)).collect();
    Ok(feasibility_search(states, &targets))
}

/// POVM with tr[ρ_i M(j)] = 1/(n−1) for all i ≠ j, or `None`.
pub fn is_uniformly_antidistinguishable(states: &[DensityOperator]) -> Result<Option<Povm>> {
    let d = common_dim(states)?;
    let n = states.len();
    if n > d * d {
        return Ok(None); // at most d² uniformly antidistinguishable states
    }
    let uniform = 1.0 / (n as f64 - 1.0);
    if d == 2 {
        return qubit_antidistinguish(states, Some(uniform));
    }
    let mut targets: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            targets.push((i, j, if i == j { 0.0 } else { uniform }));
        }
    }
    Ok(feasibility_search(states, &targets))
}

/// Builds the (unique-form) qubit witness. With `uniform = Some(u)` the
/// weights are forced by t_k(1 − r_j·r_k) = 2u for all j ≠ k; otherwise any
/// positive weights with Σt = 2 and Σ t_j r_j = 0 suffice and are found by
/// projected-gradient minimization of ‖Σ t_j r_j‖².
fn qubit_antidistinguish(
    states: &[DensityOperator],
    uniform: Option<f64>,
) -> Result<Option<Povm>> {
    // antidistinguishable qubit states must be pure
    if states.iter().any(|s| !s.is_pure()) {
        return Ok(None);
    }
    let n = states.len();
    let r: Vec<[f64; 3]> = states
        .iter()
        .map(|s| s.bloch())
        .collect::<Result<Vec<_>>>()?;
    let dot = |a: &[f64; 3], b: &[f64; 3]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let t = if let Some(u) = uniform {
        // each column forces a constant (1 − r_j·r_k); inconsistent ⇒ absent
        let mut t = vec![0.0; n];
        for k in 0..n {
            let gaps: Vec<f64> = (0..n).filter(|&j| j != k).map(|j| 1.0 - dot(&r[j], &r[k])).collect();
            if gaps.iter().any(|g| (g - gaps[0]).abs() > EPS) {
                return Ok(None);
            }
            if gaps[0] < EPS {
                return Ok(None); // coinciding states
            }
            t[k] = 2.0 * u / gaps[0];
        }
        t
    } else {
        match balance_weights(&r) {
            Some(t) => t,
            None => return Ok(None),
        }
    };
    // the weights must close the Bloch sum and normalize
    let sum_t: f64 = t.iter().sum();
    let mut closure = [0.0; 3];
    for (tj, rj) in t.iter().zip(&r) {
        for a in 0..3 {
            closure[a] += tj * rj[a];
        }
    }
    let ok = (sum_t - 2.0).abs() <= 1e-7
        && closure.iter().all(|c| c.abs() <= 1e-7)
        && t.iter().all(|&tj| tj > EPS);
    if !ok {
        return Ok(None);
    }
    let effects: Vec<CMat> = t
        .iter()
        .zip(&r)
        .map(|(&tj, &rj)| (cid(2) - super::bloch_operator(rj)) * cx(tj / 2.0, 0.))
        .collect();
    let povm = Povm::new(effects)?;
    debug_assert!(states
        .iter()
        .enumerate()
        .all(|(j, s)| product_trace(s.mat(), povm.effect(j)).re.abs() < 1e-7));
    Ok(Some(povm))
}

/// Minimizes ‖Σ t_j r_j‖² over {t ≥ 0, Σt = 2} by projected gradient from
/// the uniform start; deterministic fixed schedule.
fn balance_weights(r: &[[f64; 3]]) -> Option<Vec<f64>> {
    let n = r.len();
    let mut t = vec![2.0 / n as f64; n];
    let step = 0.1;
    for _ in 0..20_000 {
        let mut m = [0.0; 3];
        for (tj, rj) in t.iter().zip(r) {
            for a in 0..3 {
                m[a] += tj * rj[a];
            }
        }
        if m.iter().map(|x| x * x).sum::<f64>() < 1e-22 {
            break;
        }
        for (tj, rj) in t.iter_mut().zip(r) {
            let g: f64 = (0..3).map(|a| 2.0 * m[a] * rj[a]).sum();
            *tj -= step * g;
        }
        project_scaled_simplex(&mut t, 2.0);
    }
    let mut m = [0.0; 3];
    for (tj, rj) in t.iter().zip(r) {
        for a in 0..3 {
            m[a] += tj * rj[a];
        }
    }
    if m.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-8 {
        Some(t)
    } else {
        None
    }
}

/// Euclidean projection onto {t ≥ 0, Σt = s}.
pub(crate) fn project_scaled_simplex(t: &mut [f64], s: f64) {
    let mut u = t.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in u.iter().enumerate() {
        cum += v;
        let th = (cum - s) / (k as f64 + 1.0);
        if v - th > 0.0 {
            theta = th;
        }
    }
    for v in t.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Orthonormal Hermitian basis of d×d operators (Hilbert–Schmidt inner
/// product), so Hermitian operators become real coordinate vectors and
/// traces become dot products.
fn hermitian_basis(d: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(d * d);
    for k in 0..d {
        basis.push(CMat::from_fn(d, d, |i, j| {
            cx(if i == k && j == k { 1.0 } else { 0.0 }, 0.)
        }));
    }
    let inv_sqrt2 = 1.0 / f64::sqrt(2.0);
    for k in 0..d {
        for l in (k + 1)..d {
            basis.push(CMat::from_fn(d, d, |i, j| {
                if (i, j) == (k, l) || (i, j) == (l, k) {
                    cx(inv_sqrt2, 0.)
                } else {
                    cx(0., 0.)
                }
            }));
            basis.push(CMat::from_fn(d, d, |i, j| {
                if (i, j) == (k, l) {
                    cx(0., -inv_sqrt2)
                } else if (i, j) == (l, k) {
                    cx(0., inv_sqrt2)
                } else {
                    cx(0., 0.)
                }
            }));
        }
    }
    basis
}

fn coords(m: &CMat, basis: &[CMat]) -> Vec<f64> {
    basis.iter().map(|b| product_trace(b, m).re).collect()
}

fn from_coords(x: &[f64], basis: &[CMat]) -> CMat {
    let d = basis[0].nrows();
    let mut out = CMat::zeros(d, d);
    for (c, b) in x.iter().zip(basis) {
        out += b * cx(*c, 0.);
    }
    out
}

pub(crate) fn psd_project(m: &CMat) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let d = m.nrows();
    let mut out = CMat::zeros(d, d);
    for k in 0..d {
        let lam = eig.eigenvalues[k];
        if lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            let proj = CMat::from_fn(d, d, |i, j| v[i] * v[j].conj());
            out += proj * cx(lam, 0.);
        }
    }
    out
}

/// Alternating projections between the affine set {Σ_j M_j = 1,
/// tr[ρ_i M_j] = v_ij for the listed targets} and the per-effect PSD cone.
/// Returns a POVM only when every constraint holds within EPS.
fn feasibility_search(
    states: &[DensityOperator],
    targets: &[(usize, usize, f64)],
) -> Option<Povm> {
    let n = states.len();
    let d = states[0].dim();
    let basis = hermitian_basis(d);
    let dd = d * d;
    let nv = n * dd;
    let state_coords: Vec<Vec<f64>> = states.iter().map(|s| coords(s.mat(), &basis)).collect();
    let id_coords = coords(&cid(d), &basis);
    // rows of the affine system A x = b
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (e, &idc) in id_coords.iter().enumerate() {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[j * dd + e] = 1.0;
        }
        rows.push(row);
        rhs.push(idc);
    }
    for &(i, j, v) in targets {
        let mut row = vec![0.0; nv];
        row[j * dd..(j + 1) * dd].copy_from_slice(&state_coords[i]);
        rows.push(row);
        rhs.push(v);
    }
    let m = rows.len();
    let a = DMatrix::from_fn(m, nv, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let gram = &a * a.transpose();
    let gram_pinv = gram.pseudo_inverse(1e-10).ok()?;
    let affine_project = |x: &DVector<f64>| -> DVector<f64> {
        let resid = &a * x - &b;
        x - a.transpose() * (&gram_pinv * resid)
    };
    // start from the maximally mixed split M_j = 1/n
    let mut x = DVector::from_fn(nv, |idx, _| {
        let e = idx % dd;
        id_coords[e] / n as f64
    });
    for _ in 0..10_000 {
        x = affine_project(&x);
        let mut changed = 0.0f64;
        for j in 0..n {
            let slice: Vec<f64> = (0..dd).map(|e| x[j * dd + e]).collect();
            let mat = from_coords(&slice, &basis);
            let proj = psd_project(&mat);
            let back = coords(&proj, &basis);
            for (e, v) in back.iter().enumerate() {
                changed = changed.max((x[j * dd + e] - v).abs());
                x[j * dd + e] = *v;
            }
        }
        if changed < 1e-13 {
            break;
        }
    }
    // land exactly on the affine set; near convergence the PSD defect this
    // reintroduces stays within the physicality tolerance
    x = affine_project(&x);
    // verify every constraint on the candidate
    let effects: Vec<CMat> = (0..n)
        .map(|j| {
            let slice: Vec<f64> = (0..dd).map(|e| x[j * dd + e]).collect();
            from_coords(&slice, &basis)
        })
        .collect();
    let mut sum = CMat::zeros(d, d);
    for e in &effects {
        sum += e;
        if herm_eigenvalues(e)[0] < -EPS {
            return None;
        }
    }
    if (&sum - cid(d)).iter().map(|z| z.norm()).fold(0.0, f64::max) > EPS {
        return None;
    }
    for &(i, j, v) in targets {
        if (product_trace(states[i].mat(), &effects[j]).re - v).abs() > EPS {
            return None;
        }
    }
    Povm::new(effects).ok()
}
