//! Euclidean projections onto the supported cones and their duals.
//!
//! The exponential-cone projection reduces to a one-dimensional search over
//! the slope `a = x/y` of the touching point on the curved boundary: for a
//! fixed slope the optimal `y` is available in closed form, so the projection
//! is a grid scan plus golden-section refinement of the distance profile,
//! compared against the flat-part candidate `(min(x,0), 0, max(z,0))`.

/// Cone block tags. `Soc` heads are the first entry of the block; `Exp` is
/// the three-point cone `{(x,y,z) : y > 0, y e^{x/y} <= z}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ConeTag {
    Zero,
    NonNeg,
    Soc,
    Exp,
}

/// Membership slack used so that points returned by the projection itself
/// test as members (idempotency at machine precision).
const MEMBER_TOL: f64 = 1e-12;

/// `(x,y,z)` in the closure of the exponential cone.
pub fn in_exp(x: f64, y: f64, z: f64) -> bool {
    let tol = MEMBER_TOL * z.abs().max(1.0);
    (y > 0.0 && y * (x / y).exp() <= z + tol) || (y == 0.0 && x <= 0.0 && z >= -tol)
}

/// `(u,v,w)` in the closure of the dual exponential cone
/// `{(u,v,w) : u < 0, -u e^{v/u} <= e w}`.
pub fn in_exp_dual(u: f64, v: f64, w: f64) -> bool {
    let tol = MEMBER_TOL * w.abs().max(1.0);
    (u < 0.0 && -u * (v / u).exp() <= std::f64::consts::E * (w + tol))
        || (u.abs() <= MEMBER_TOL && v >= -MEMBER_TOL && w >= -MEMBER_TOL)
}

/// Projection onto the nonnegative orthant, elementwise.
pub fn proj_nonneg(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Projection onto the second-order cone `s0 >= ||s_rest||`.
pub fn proj_soc(v: &mut [f64]) {
    let head = v[0];
    let tail_norm = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if tail_norm <= head {
        return;
    }
    if tail_norm <= -head {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let coef = 0.5 * (head + tail_norm);
    v[0] = coef;
    let scale = coef / tail_norm;
    for x in &mut v[1..] {
        *x *= scale;
    }
}

/// For slope `a`, the distance-minimizing `y > 0` on the boundary ray
/// `(a y, y, y e^a)` toward the point `(r,s,t)`, and the squared distance.
fn curved_candidate(a: f64, r: f64, s: f64, t: f64) -> Option<([f64; 3], f64)> {
    let e = a.exp();
    if !e.is_finite() {
        return None;
    }
    let denom = a * a + 1.0 + e * e;
    if !denom.is_finite() {
        return None;
    }
    let y = (a * r + s + t * e) / denom;
    if !(y > 0.0) || !y.is_finite() {
        return None;
    }
    let p = [a * y, y, y * e];
    let d2 = (p[0] - r).powi(2) + (p[1] - s).powi(2) + (p[2] - t).powi(2);
    Some((p, d2))
}

fn dist2(p: [f64; 3], r: f64, s: f64, t: f64) -> f64 {
    (p[0] - r).powi(2) + (p[1] - s).powi(2) + (p[2] - t).powi(2)
}

/// Stationarity residual of the squared distance along the curved boundary:
/// the profile's derivative has the sign of `(a y - r) + e^a (y e^a - t)`.
fn stationarity(a: f64, r: f64, s: f64, t: f64) -> Option<f64> {
    let e = a.exp();
    if !e.is_finite() {
        return None;
    }
    let denom = a * a + 1.0 + e * e;
    if !denom.is_finite() {
        return None;
    }
    let y = (a * r + s + t * e) / denom;
    if !(y > 0.0) {
        return None;
    }
    Some((a * y - r) + e * (y * e - t))
}

/// Bisection on the stationarity residual; far more precise than searching
/// the (often extremely flat) distance profile directly.
fn refine_bisection(lo: f64, hi: f64, r: f64, s: f64, t: f64) -> Option<([f64; 3], f64)> {
    let glo = stationarity(lo, r, s, t)?;
    let ghi = stationarity(hi, r, s, t)?;
    if glo > 0.0 || ghi < 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match stationarity(mid, r, s, t) {
            Some(g) if g < 0.0 => lo = mid,
            Some(_) => hi = mid,
            None => return None,
        }
    }
    curved_candidate(0.5 * (lo + hi), r, s, t)
}

/// Golden-section refinement of the curved-boundary distance over `a`.
fn refine_golden(mut lo: f64, mut hi: f64, r: f64, s: f64, t: f64) -> Option<([f64; 3], f64)> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let f = |a: f64| curved_candidate(a, r, s, t).map_or(f64::INFINITY, |(_, d2)| d2);
    let mut a1 = hi - PHI * (hi - lo);
    let mut a2 = lo + PHI * (hi - lo);
    let mut f1 = f(a1);
    let mut f2 = f(a2);
    for _ in 0..120 {
        if f1 <= f2 {
            hi = a2;
            a2 = a1;
            f2 = f1;
            a1 = hi - PHI * (hi - lo);
            f1 = f(a1);
        } else {
            lo = a1;
            a1 = a2;
            f1 = f2;
            a2 = lo + PHI * (hi - lo);
            f2 = f(a2);
        }
        if (hi - lo).abs() < 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
    }
    let best = 0.5 * (lo + hi);
    curved_candidate(best, r, s, t)
}

/// Euclidean projection onto the closure of the exponential cone.
pub fn proj_exp(v: [f64; 3]) -> [f64; 3] {
    let [r, s, t] = v;
    if in_exp(r, s, t) {
        return v;
    }
    // v in the polar cone (equivalently -v in the dual cone): projection is 0.
    if in_exp_dual(-r, -s, -t) {
        return [0.0, 0.0, 0.0];
    }
    if r <= 0.0 && s <= 0.0 {
        // Projection onto the flat part {x <= 0, y = 0, z >= 0}; optimality
        // holds because the residual (0, s, min(t,0)) lies in the polar cone
        // and is orthogonal to the projection.
        return [r, 0.0, t.max(0.0)];
    }

    // Scan the curved boundary over the slope, refine stationarity sign
    // changes, and compare against the flat-part candidate.
    let flat = [r.min(0.0), 0.0, t.max(0.0)];
    let mut best_p = flat;
    let mut best_d2 = dist2(flat, r, s, t);
    let mut consider = |cand: Option<([f64; 3], f64)>, best_p: &mut [f64; 3], best_d2: &mut f64| {
        if let Some((p, d2)) = cand {
            if d2 < *best_d2 {
                *best_d2 = d2;
                *best_p = p;
            }
        }
    };

    const GRID_LO: f64 = -60.0;
    const GRID_HI: f64 = 60.0;
    const GRID_N: usize = 241;
    const EXPAND_CAP: f64 = 2.0e7;
    let step = (GRID_HI - GRID_LO) / (GRID_N - 1) as f64;
    let grid_a = |i: usize| GRID_LO + step * i as f64;
    let gs: Vec<Option<f64>> = (0..GRID_N).map(|i| stationarity(grid_a(i), r, s, t)).collect();

    // interior minima: derivative crosses from <= 0 to >= 0
    for i in 0..GRID_N - 1 {
        if let (Some(gl), Some(gr)) = (gs[i], gs[i + 1]) {
            if gl <= 0.0 && gr >= 0.0 {
                let cand = refine_bisection(grid_a(i), grid_a(i + 1), r, s, t)
                    .or_else(|| refine_golden(grid_a(i), grid_a(i + 1), r, s, t));
                consider(cand, &mut best_p, &mut best_d2);
            }
        }
    }

    // profile still decreasing toward an edge: expand the search outward
    if let Some((i, g_first)) = gs.iter().enumerate().find_map(|(i, g)| g.map(|v| (i, v))) {
        if g_first > 0.0 {
            let mut prev = grid_a(i);
            let mut stride = step;
            while prev > -EXPAND_CAP {
                let a = prev - stride;
                match stationarity(a, r, s, t) {
                    Some(g) if g <= 0.0 => {
                        consider(refine_bisection(a, prev, r, s, t), &mut best_p, &mut best_d2);
                        break;
                    }
                    Some(_) => {
                        prev = a;
                        stride *= 1.7;
                    }
                    None => break,
                }
            }
        }
    }
    if let Some((i, g_last)) = gs.iter().enumerate().rev().find_map(|(i, g)| g.map(|v| (i, v))) {
        if g_last < 0.0 {
            let mut prev = grid_a(i);
            let mut stride = step;
            while prev < EXPAND_CAP {
                let a = prev + stride;
                match stationarity(a, r, s, t) {
                    Some(g) if g >= 0.0 => {
                        consider(refine_bisection(prev, a, r, s, t), &mut best_p, &mut best_d2);
                        break;
                    }
                    Some(_) => {
                        prev = a;
                        stride *= 1.7;
                    }
                    None => break,
                }
            }
        }
    }
    best_p
}

/// Projection onto the dual of the exponential cone via Moreau:
/// `proj_{K*}(v) = v + proj_K(-v)`.
pub fn proj_exp_dual(v: [f64; 3]) -> [f64; 3] {
    let p = proj_exp([-v[0], -v[1], -v[2]]);
    [v[0] + p[0], v[1] + p[1], v[2] + p[2]]
}

/// In-place projection of a cone block onto the PRIMAL cone.
pub fn proj_primal(tag: ConeTag, v: &mut [f64]) {
    match tag {
        ConeTag::Zero => v.iter_mut().for_each(|x| *x = 0.0),
        ConeTag::NonNeg => proj_nonneg(v),
        ConeTag::Soc => proj_soc(v),
        ConeTag::Exp => {
            let p = proj_exp([v[0], v[1], v[2]]);
            v.copy_from_slice(&p);
        }
    }
}

/// In-place projection of a cone block onto the DUAL cone.
pub fn proj_dual(tag: ConeTag, v: &mut [f64]) {
    match tag {
        ConeTag::Zero => {} // dual of {0} is everything
        ConeTag::NonNeg => proj_nonneg(v),
        ConeTag::Soc => proj_soc(v),
        ConeTag::Exp => {
            let p = proj_exp_dual([v[0], v[1], v[2]]);
            v.copy_from_slice(&p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_point(rng: &mut StdRng, scale: f64) -> [f64; 3] {
        [
            (rng.gen::<f64>() - 0.5) * scale,
            (rng.gen::<f64>() - 0.5) * scale,
            (rng.gen::<f64>() - 0.5) * scale,
        ]
    }

    fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    fn nrm(a: [f64; 3]) -> f64 {
        dot(a, a).sqrt()
    }

    #[test]
    fn soc_projection_cases() {
        let mut inside = vec![2.0, 1.0, 1.0];
        proj_soc(&mut inside);
        assert_eq!(inside, vec![2.0, 1.0, 1.0]);

        let mut polar = vec![-2.0, 1.0, 0.0];
        proj_soc(&mut polar);
        assert_eq!(polar, vec![0.0, 0.0, 0.0]);

        let mut boundary = vec![0.0, 2.0];
        proj_soc(&mut boundary);
        assert!((boundary[0] - 1.0).abs() < 1e-15);
        assert!((boundary[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projections_are_idempotent_on_random_points() {
        let mut rng = StdRng::seed_from_u64(42);
        for i in 0..10_000 {
            let scale = if i % 3 == 0 { 20.0 } else { 2.0 };
            // soc
            let mut v = vec![
                (rng.gen::<f64>() - 0.5) * scale,
                (rng.gen::<f64>() - 0.5) * scale,
                (rng.gen::<f64>() - 0.5) * scale,
                (rng.gen::<f64>() - 0.5) * scale,
            ];
            proj_soc(&mut v);
            let mut w = v.clone();
            proj_soc(&mut w);
            for (a, b) in v.iter().zip(&w) {
                assert!((a - b).abs() <= 1e-12, "soc idempotency: {v:?} vs {w:?}");
            }
            // nonneg
            let mut v = vec![(rng.gen::<f64>() - 0.5) * scale; 4];
            proj_nonneg(&mut v);
            let w = v.clone();
            proj_nonneg(&mut v);
            assert_eq!(v, w);
            // exp
            let p = proj_exp(rand_point(&mut rng, scale));
            let q = proj_exp(p);
            assert!(
                nrm(sub(p, q)) <= 1e-12 * (1.0 + nrm(p)),
                "exp idempotency failed: {p:?} -> {q:?}"
            );
        }
    }

    #[test]
    fn exp_projection_satisfies_membership_and_polar_conditions() {
        let mut rng = StdRng::seed_from_u64(7);
        for i in 0..10_000 {
            let scale = if i % 4 == 0 { 30.0 } else { 3.0 };
            let v = rand_point(&mut rng, scale);
            let p = proj_exp(v);
            // membership: y e^{x/y} <= z + 1e-9 (flat part: x<=0, y=0, z>=0)
            if p[1] > 0.0 {
                assert!(
                    p[1] * (p[0] / p[1]).exp() <= p[2] + 1e-9,
                    "membership failed for {v:?} -> {p:?}"
                );
            } else {
                assert!(p[0] <= 1e-12 && p[1].abs() <= 1e-12 && p[2] >= -1e-12);
            }
            // residual lies in the polar cone: its distance to the polar cone
            // (= norm of its primal projection, by Moreau) is negligible
            let d = sub(v, p);
            let back = proj_exp(d);
            assert!(
                nrm(back) <= 1e-7 * (1.0 + nrm(v)),
                "polar condition failed for {v:?} -> {p:?} (residual {d:?}, dist {})",
                nrm(back)
            );
            // orthogonality <p, v-p> ~ 0
            let ortho = dot(p, d).abs();
            assert!(
                ortho <= 1e-7 * (1.0 + nrm(p) * nrm(d)),
                "orthogonality failed for {v:?}: {ortho}"
            );
        }
    }

    #[test]
    fn exp_projection_beats_random_feasible_points() {
        // Optimality cross-check: no sampled member of the cone is closer.
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..200 {
            let v = rand_point(&mut rng, 4.0);
            let p = proj_exp(v);
            let dp = nrm(sub(v, p));
            for _ in 0..300 {
                let a = (rng.gen::<f64>() - 0.5) * 12.0;
                let y = rng.gen::<f64>() * 5.0 + 1e-9;
                let member = [a * y, y, y * a.exp() * (1.0 + rng.gen::<f64>())];
                if member[2].is_finite() {
                    assert!(
                        nrm(sub(v, member)) >= dp - 1e-7,
                        "sampled member closer than projection for {v:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn exp_dual_projection_via_moreau_decomposes() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..2_000 {
            let v = rand_point(&mut rng, 6.0);
            let p = proj_exp(v);
            let q = proj_exp_dual([-v[0], -v[1], -v[2]]);
            // v = proj_K(v) - proj_K*(-v)
            let rec = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            assert!(nrm(sub(v, rec)) <= 1e-8 * (1.0 + nrm(v)), "moreau failed {v:?}");
        }
    }

    #[test]
    fn known_exp_projections() {
        // interior point unchanged
        let p = proj_exp([0.0, 1.0, 2.0]);
        assert_eq!(p, [0.0, 1.0, 2.0]);
        // polar point maps to zero: -(1,0,-1) = (-1,0,1) is dual-feasible
        let p = proj_exp([1.0, 0.0, -1.0]);
        assert_eq!(p, [0.0, 0.0, 0.0]);
        // flat region
        let p = proj_exp([-2.0, -3.0, 4.0]);
        assert_eq!(p, [-2.0, 0.0, 4.0]);
        // flat region with negative z: residual (0,s,t) stays polar
        let p = proj_exp([-1.0, -1.0, -5.0]);
        assert_eq!(p, [-1.0, 0.0, 0.0]);
        // boundary point unchanged: (1, 1, e)
        let e = std::f64::consts::E;
        let p = proj_exp([1.0, 1.0, e]);
        assert!(nrm(sub(p, [1.0, 1.0, e])) < 1e-12);
    }
}
