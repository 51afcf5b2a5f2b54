//! Convex bodies, node sets, and certified one-sided Hausdorff distances.
//!
//! The central quantity is `e(X, xi) = sup_{x in X} min_{y in xi} |x - y|`
//! for X the body or its boundary. It is estimated by sweeping a covering
//! sample of X and exploiting that `x -> e(x, xi)` is 1-Lipschitz: a sample
//! set with dispersion `r` pins the supremum inside `[max, max + r]`. Three
//! levels of local bisection refinement around every sample that could still
//! hide the supremum shrink the slack to `r / 8`, which is returned as a
//! certified gap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{IsorecError, Result};
use crate::scalar::Real;

/// Hard cap on the number of candidate points a certified sweep may touch.
/// Also bounds the memory any single estimate can consume.
pub const SAMPLE_BUDGET: usize = 100_000_000;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

/// Fixed-width point used in hot loops; coordinates past `dim` stay zero.
pub(crate) type P4<R> = [R; 4];

pub(crate) fn to_p4<R: Real>(x: &[R]) -> P4<R> {
    let mut p = [R::zero(); 4];
    p[..x.len()].copy_from_slice(x);
    p
}

pub(crate) fn dist_sq<R: Real>(a: &P4<R>, b: &P4<R>, dim: usize) -> R {
    let mut s = R::zero();
    for i in 0..dim {
        let d = a[i] - b[i];
        s = s + d * d;
    }
    s
}

/// Endpoint-exact linear interpolation: u = 0 gives a, u = 1 gives b.
fn lerp<R: Real>(a: R, b: R, u: R) -> R {
    a * (R::one() - u) + b * u
}

/// ceil(len / h) with a relative shave so that exact integer ratios do not
/// round up through floating-point noise; at least 1.
fn count_ceil<R: Real>(len: R, h: R) -> usize {
    let ratio = (len / h).max(R::zero());
    let shaved = ratio - R::of(1e-9) * (ratio + R::one());
    (shaved.ceil().as_f64().max(1.0)) as usize
}

/// Iterate the product of `counts` ranges, calling `f` with each multi-index.
/// An empty `counts` yields a single empty index.
fn odometer<F: FnMut(&[usize])>(counts: &[usize], mut f: F) {
    if counts.iter().any(|&c| c == 0) {
        return;
    }
    let mut idx = vec![0usize; counts.len()];
    loop {
        f(&idx);
        let mut a = 0;
        loop {
            if a == counts.len() {
                return;
            }
            idx[a] += 1;
            if idx[a] < counts[a] {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Volume of the Euclidean unit ball in dimension d.
pub fn unit_ball_volume<R: Real>(d: usize) -> R {
    // nu_0 = 1, nu_1 = 2, nu_d = nu_{d-2} * 2 pi / d
    let mut v = if d % 2 == 0 { R::one() } else { R::of(2.0) };
    let mut k = d % 2;
    while k < d {
        k += 2;
        v = v * R::of(2.0 * std::f64::consts::PI) / R::of_usize(k);
    }
    v
}

/// A closed convex body with non-empty interior, d <= 4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "")]
pub enum ConvexBody<R: Real> {
    /// Axis-aligned box, lo < hi componentwise.
    Box { lo: Vec<R>, hi: Vec<R> },
    /// Euclidean ball.
    Ball { center: Vec<R>, radius: R },
    /// Strictly convex polygon, vertices in counterclockwise order.
    #[serde(rename = "polygon")]
    Polygon2D { vertices: Vec<[R; 2]> },
}

impl<R: Real> ConvexBody<R> {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Box { lo, .. } => lo.len(),
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::Polygon2D { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(IsorecError::Domain(msg));
        match self {
            ConvexBody::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return bad("box lo and hi have different dimensions".into());
                }
                if lo.is_empty() || lo.len() > MAX_DIM {
                    return bad(format!("box dimension {} not in 1..=4", lo.len()));
                }
                for i in 0..lo.len() {
                    if !lo[i].is_finite() || !hi[i].is_finite() {
                        return bad("box coordinates must be finite".into());
                    }
                    if !(lo[i] < hi[i]) {
                        return bad(format!("box needs lo < hi on axis {i}"));
                    }
                }
            }
            ConvexBody::Ball { center, radius } => {
                if center.is_empty() || center.len() > MAX_DIM {
                    return bad(format!("ball dimension {} not in 1..=4", center.len()));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return bad("ball center must be finite".into());
                }
                if !radius.is_finite() || !(*radius > R::zero()) {
                    return bad("ball radius must be positive and finite".into());
                }
            }
            ConvexBody::Polygon2D { vertices } => {
                if vertices.len() < 3 {
                    return bad("polygon needs at least 3 vertices".into());
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return bad("polygon vertices must be finite".into());
                }
                let n = vertices.len();
                let mut turning = R::zero();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    let e1 = [b[0] - a[0], b[1] - a[1]];
                    let e2 = [c[0] - b[0], c[1] - b[1]];
                    let cross = e1[0] * e2[1] - e1[1] * e2[0];
                    if !(cross > R::zero()) {
                        return bad(format!(
                            "polygon must be strictly convex and counterclockwise \
                             (turn at vertex {} is not a left turn)",
                            (i + 1) % n
                        ));
                    }
                    turning = turning + cross.atan2(e1[0] * e2[0] + e1[1] * e2[1]);
                }
                // left turns summing to one full revolution rule out windings
                let two_pi = R::of(2.0 * std::f64::consts::PI);
                if (turning - two_pi).abs() > R::of(1e-9) {
                    return bad("polygon winds more than once".into());
                }
            }
        }
        Ok(())
    }

    /// Closed membership test.
    pub fn contains(&self, x: &[R]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(IsorecError::Domain(format!(
                "point dimension {} does not match body dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.contains_p4(&to_p4(x)))
    }

    pub(crate) fn contains_p4(&self, x: &P4<R>) -> bool {
        match self {
            ConvexBody::Box { lo, hi } => (0..lo.len()).all(|i| lo[i] <= x[i] && x[i] <= hi[i]),
            ConvexBody::Ball { center, radius } => {
                let mut s = R::zero();
                for i in 0..center.len() {
                    let d = x[i] - center[i];
                    s = s + d * d;
                }
                s <= *radius * *radius
            }
            ConvexBody::Polygon2D { vertices } => {
                let n = vertices.len();
                let eps = R::of(8.0) * R::epsilon();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let w = [x[0] - a[0], x[1] - a[1]];
                    let cross = e[0] * w[1] - e[1] * w[0];
                    // tolerance absorbs rounding in points built on the edge
                    let scale = (e[0] * e[0] + e[1] * e[1]).sqrt()
                        * ((w[0] * w[0] + w[1] * w[1]).sqrt()
                            + (e[0] * e[0] + e[1] * e[1]).sqrt());
                    if cross < -eps * scale {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Lebesgue measure; exact for boxes and balls, shoelace for polygons.
    pub fn volume(&self) -> R {
        match self {
            ConvexBody::Box { lo, hi } => {
                let mut v = R::one();
                for i in 0..lo.len() {
                    v = v * (hi[i] - lo[i]);
                }
                v
            }
            ConvexBody::Ball { center, radius } => {
                unit_ball_volume::<R>(center.len()) * radius.powi(center.len() as i32)
            }
            ConvexBody::Polygon2D { vertices } => {
                let n = vertices.len();
                let mut s = R::zero();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    s = s + a[0] * b[1] - b[0] * a[1];
                }
                s / R::of(2.0)
            }
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Vec<R>, Vec<R>) {
        match self {
            ConvexBody::Box { lo, hi } => (lo.clone(), hi.clone()),
            ConvexBody::Ball { center, radius } => (
                center.iter().map(|&c| c - *radius).collect(),
                center.iter().map(|&c| c + *radius).collect(),
            ),
            ConvexBody::Polygon2D { vertices } => {
                let mut lo = vec![R::infinity(); 2];
                let mut hi = vec![R::neg_infinity(); 2];
                for v in vertices {
                    for a in 0..2 {
                        lo[a] = lo[a].min(v[a]);
                        hi[a] = hi[a].max(v[a]);
                    }
                }
                (lo, hi)
            }
        }
    }

    pub(crate) fn diameter_bound(&self) -> R {
        let (lo, hi) = self.bounding_box();
        let mut s = R::zero();
        for i in 0..lo.len() {
            let d = hi[i] - lo[i];
            s = s + d * d;
        }
        s.sqrt()
    }

    /// Closest point of the (closed) body; the identity on members.
    pub fn project(&self, x: &[R]) -> Vec<R> {
        let p = self.project_p4(&to_p4(x));
        p[..self.dim()].to_vec()
    }

    pub(crate) fn project_p4(&self, x: &P4<R>) -> P4<R> {
        match self {
            ConvexBody::Box { lo, hi } => {
                let mut p = *x;
                for i in 0..lo.len() {
                    p[i] = p[i].max(lo[i]).min(hi[i]);
                }
                p
            }
            ConvexBody::Ball { center, radius } => {
                let d = center.len();
                let mut diff = [R::zero(); 4];
                let mut s = R::zero();
                for i in 0..d {
                    diff[i] = x[i] - center[i];
                    s = s + diff[i] * diff[i];
                }
                if s <= *radius * *radius {
                    return *x;
                }
                let scale = *radius / s.sqrt();
                let mut p = [R::zero(); 4];
                for i in 0..d {
                    p[i] = center[i] + diff[i] * scale;
                }
                p
            }
            ConvexBody::Polygon2D { .. } => {
                if self.contains_p4(x) {
                    *x
                } else {
                    self.project_boundary_p4(x)
                }
            }
        }
    }

    /// Closest point of the boundary (not the identity on interior points).
    pub fn project_to_boundary(&self, x: &[R]) -> Vec<R> {
        let p = self.project_boundary_p4(&to_p4(x));
        p[..self.dim()].to_vec()
    }

    pub(crate) fn project_boundary_p4(&self, x: &P4<R>) -> P4<R> {
        match self {
            ConvexBody::Box { lo, hi } => {
                let d = lo.len();
                let mut p = *x;
                let mut outside = false;
                for i in 0..d {
                    if p[i] < lo[i] || p[i] > hi[i] {
                        outside = true;
                    }
                    p[i] = p[i].max(lo[i]).min(hi[i]);
                }
                if outside {
                    // the clamp of an exterior point already sits on a face
                    return p;
                }
                // interior: snap the coordinate with the smallest face margin
                let mut axis = 0;
                let mut to_lo = true;
                let mut margin = R::infinity();
                for i in 0..d {
                    let m_lo = p[i] - lo[i];
                    let m_hi = hi[i] - p[i];
                    if m_lo < margin {
                        margin = m_lo;
                        axis = i;
                        to_lo = true;
                    }
                    if m_hi < margin {
                        margin = m_hi;
                        axis = i;
                        to_lo = false;
                    }
                }
                p[axis] = if to_lo { lo[axis] } else { hi[axis] };
                p
            }
            ConvexBody::Ball { center, radius } => {
                let d = center.len();
                let mut diff = [R::zero(); 4];
                let mut s = R::zero();
                for i in 0..d {
                    diff[i] = x[i] - center[i];
                    s = s + diff[i] * diff[i];
                }
                let mut p = [R::zero(); 4];
                if s == R::zero() {
                    p[..d].copy_from_slice(&center[..d]);
                    p[0] = p[0] + *radius;
                    return p;
                }
                let scale = *radius / s.sqrt();
                for i in 0..d {
                    p[i] = center[i] + diff[i] * scale;
                }
                p
            }
            ConvexBody::Polygon2D { vertices } => {
                let n = vertices.len();
                let mut best = [R::zero(); 4];
                let mut best_d = R::infinity();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let w = [x[0] - a[0], x[1] - a[1]];
                    let ee = e[0] * e[0] + e[1] * e[1];
                    let t = ((w[0] * e[0] + w[1] * e[1]) / ee)
                        .max(R::zero())
                        .min(R::one());
                    let c = [lerp(a[0], b[0], t), lerp(a[1], b[1], t)];
                    let dx = x[0] - c[0];
                    let dy = x[1] - c[1];
                    let d2 = dx * dx + dy * dy;
                    if d2 < best_d {
                        best_d = d2;
                        best[0] = c[0];
                        best[1] = c[1];
                    }
                }
                best
            }
        }
    }

    /// Points on the boundary such that every boundary point lies within
    /// `dispersion` of some sample.
    pub fn boundary_sample(&self, dispersion: R) -> Result<Vec<Vec<R>>> {
        let d = self.dim();
        Ok(self
            .boundary_sample_p4(dispersion)?
            .into_iter()
            .map(|p| p[..d].to_vec())
            .collect())
    }

    pub(crate) fn boundary_sample_p4(&self, h: R) -> Result<Vec<P4<R>>> {
        self.validate()?;
        if !(h > R::zero()) || !h.is_finite() {
            return Err(IsorecError::Parameter(
                "dispersion must be positive and finite".into(),
            ));
        }
        let count = self.boundary_count_estimate(h)?;
        let mut out: Vec<P4<R>> = Vec::with_capacity(count.min(1 << 20));
        match self {
            ConvexBody::Box { lo, hi } => {
                let d = lo.len();
                for axis in 0..d {
                    for side in 0..2 {
                        let others: Vec<usize> = (0..d).filter(|&a| a != axis).collect();
                        let counts: Vec<usize> =
                            others.iter().map(|&a| count_ceil(hi[a] - lo[a], h) + 1).collect();
                        odometer(&counts, |idx| {
                            let mut p = [R::zero(); 4];
                            p[axis] = if side == 0 { lo[axis] } else { hi[axis] };
                            for (j, &a) in others.iter().enumerate() {
                                let u = R::of_usize(idx[j]) / R::of_usize(counts[j] - 1);
                                p[a] = lerp(lo[a], hi[a], u);
                            }
                            out.push(p);
                        });
                    }
                }
                // faces share edges and corners; the lerp endpoints are exact,
                // so duplicates compare equal and can be removed
                out.sort_by(|a, b| lex_cmp(a, b, d));
                out.dedup();
            }
            ConvexBody::Ball { center, radius } => {
                let c = to_p4(center);
                let r = *radius;
                match center.len() {
                    1 => {
                        out.push([c[0] - r, R::zero(), R::zero(), R::zero()]);
                        out.push([c[0] + r, R::zero(), R::zero(), R::zero()]);
                    }
                    2 => {
                        let n = count_ceil(R::of(2.0 * std::f64::consts::PI) * r, h);
                        for k in 0..n {
                            let th = R::of(2.0 * std::f64::consts::PI) * R::of_usize(k)
                                / R::of_usize(n);
                            out.push([
                                c[0] + r * th.cos(),
                                c[1] + r * th.sin(),
                                R::zero(),
                                R::zero(),
                            ]);
                        }
                    }
                    3 => {
                        // latitude-longitude net with angular step h / sqrt(2)
                        let pi = R::of(std::f64::consts::PI);
                        let s = h / R::of(2.0).sqrt();
                        let m = count_ceil(pi * r, s);
                        for j in 0..=m {
                            let th = pi * R::of_usize(j) / R::of_usize(m);
                            let rho = r * th.sin();
                            let n = count_ceil(R::of(2.0) * pi * rho, s);
                            for k in 0..n {
                                let ph =
                                    R::of(2.0) * pi * R::of_usize(k) / R::of_usize(n);
                                out.push([
                                    c[0] + rho * ph.cos(),
                                    c[1] + rho * ph.sin(),
                                    c[2] + r * th.cos(),
                                    R::zero(),
                                ]);
                            }
                        }
                    }
                    _ => {
                        // nested hyperspherical net with angular step h / sqrt(3)
                        let pi = R::of(std::f64::consts::PI);
                        let s = h / R::of(3.0).sqrt();
                        let m1 = count_ceil(pi * r, s);
                        for i in 0..=m1 {
                            let psi = pi * R::of_usize(i) / R::of_usize(m1);
                            let r2 = r * psi.sin();
                            let m2 = count_ceil(pi * r2, s);
                            for j in 0..=m2 {
                                let th = pi * R::of_usize(j) / R::of_usize(m2);
                                let rho = r2 * th.sin();
                                let n = count_ceil(R::of(2.0) * pi * rho, s);
                                for k in 0..n {
                                    let ph =
                                        R::of(2.0) * pi * R::of_usize(k) / R::of_usize(n);
                                    out.push([
                                        c[0] + r * psi.cos(),
                                        c[1] + r2 * th.cos(),
                                        c[2] + rho * ph.cos(),
                                        c[3] + rho * ph.sin(),
                                    ]);
                                }
                            }
                        }
                    }
                }
            }
            ConvexBody::Polygon2D { vertices } => {
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let len =
                        ((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1])).sqrt();
                    let m = count_ceil(len, h);
                    // the endpoint is the next edge's start, emit it once
                    for k in 0..m {
                        let u = R::of_usize(k) / R::of_usize(m);
                        out.push([lerp(a[0], b[0], u), lerp(a[1], b[1], u), R::zero(), R::zero()]);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Number of boundary samples the net above would produce.
    fn boundary_count_estimate(&self, h: R) -> Result<usize> {
        let over = || {
            Err(IsorecError::Budget(format!(
                "boundary sampling would exceed {SAMPLE_BUDGET} points"
            )))
        };
        let mut total: usize = 0;
        let mut add = |k: usize| -> bool {
            total = total.saturating_add(k);
            total <= SAMPLE_BUDGET
        };
        match self {
            ConvexBody::Box { lo, hi } => {
                let d = lo.len();
                for axis in 0..d {
                    let mut face = 1usize;
                    for a in 0..d {
                        if a != axis {
                            face = face.saturating_mul(count_ceil(hi[a] - lo[a], h) + 1);
                        }
                    }
                    if !add(2 * face) {
                        return over();
                    }
                }
            }
            ConvexBody::Ball { center, radius } => {
                let r = *radius;
                let pi = R::of(std::f64::consts::PI);
                match center.len() {
                    1 => {
                        total = 2;
                    }
                    2 => {
                        if !add(count_ceil(R::of(2.0) * pi * r, h)) {
                            return over();
                        }
                    }
                    3 => {
                        let s = h / R::of(2.0).sqrt();
                        let m = count_ceil(pi * r, s);
                        if m > SAMPLE_BUDGET {
                            return over();
                        }
                        for j in 0..=m {
                            let rho = r * (pi * R::of_usize(j) / R::of_usize(m)).sin();
                            if !add(count_ceil(R::of(2.0) * pi * rho, s)) {
                                return over();
                            }
                        }
                    }
                    _ => {
                        let s = h / R::of(3.0).sqrt();
                        let m1 = count_ceil(pi * r, s);
                        if m1 > (SAMPLE_BUDGET as f64).sqrt() as usize {
                            return over();
                        }
                        for i in 0..=m1 {
                            let r2 = r * (pi * R::of_usize(i) / R::of_usize(m1)).sin();
                            let m2 = count_ceil(pi * r2, s);
                            for j in 0..=m2 {
                                let rho = r2 * (pi * R::of_usize(j) / R::of_usize(m2)).sin();
                                if !add(count_ceil(R::of(2.0) * pi * rho, s)) {
                                    return over();
                                }
                            }
                        }
                    }
                }
            }
            ConvexBody::Polygon2D { vertices } => {
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let len =
                        ((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1])).sqrt();
                    if !add(count_ceil(len, h)) {
                        return over();
                    }
                }
            }
        }
        Ok(total)
    }

    /// Materialized covering sample of the whole body with the given
    /// dispersion: grid cell centers, centers just outside projected back,
    /// and a boundary net.
    pub(crate) fn interior_cover(&self, resolution: R) -> Result<Vec<P4<R>>> {
        let grid = CellGrid::build(self, resolution)?;
        let bnd = self.boundary_sample_p4(resolution)?;
        if grid.total.saturating_add(bnd.len()) > SAMPLE_BUDGET {
            return Err(IsorecError::Budget(format!(
                "covering sample would exceed {SAMPLE_BUDGET} points"
            )));
        }
        let mut out = Vec::with_capacity(grid.total + bnd.len());
        for flat in 0..grid.total {
            if let Some(p) = grid.keep(self, flat) {
                out.push(p);
            }
        }
        out.extend(bnd);
        Ok(out)
    }
}

fn lex_cmp<R: Real>(a: &P4<R>, b: &P4<R>, dim: usize) -> std::cmp::Ordering {
    for i in 0..dim {
        if a[i] < b[i] {
            return std::cmp::Ordering::Less;
        }
        if a[i] > b[i] {
            return std::cmp::Ordering::Greater;
        }
    }
    std::cmp::Ordering::Equal
}

/// Uniform grid of cell centers over the bounding box whose kept points
/// (centers inside the body, near-miss centers projected onto it) cover the
/// body with dispersion at most the requested resolution.
struct CellGrid<R: Real> {
    dim: usize,
    lo: P4<R>,
    hi: P4<R>,
    m: [usize; 4],
    total: usize,
    half_diag: R,
}

impl<R: Real> CellGrid<R> {
    fn build(body: &ConvexBody<R>, resolution: R) -> Result<Self> {
        body.validate()?;
        if !(resolution > R::zero()) || !resolution.is_finite() {
            return Err(IsorecError::Parameter(
                "resolution must be positive and finite".into(),
            ));
        }
        let d = body.dim();
        let (lov, hiv) = body.bounding_box();
        // per-axis step small enough that a cell half-diagonal is <= resolution
        let step = R::of(2.0) * resolution / R::of_usize(d).sqrt();
        let mut m = [1usize; 4];
        let mut total = 1usize;
        let mut diag = R::zero();
        for a in 0..d {
            m[a] = count_ceil(hiv[a] - lov[a], step);
            total = total.saturating_mul(m[a]);
            let s = (hiv[a] - lov[a]) / R::of_usize(m[a]);
            diag = diag + s * s;
        }
        if total > SAMPLE_BUDGET {
            return Err(IsorecError::Budget(format!(
                "interior grid of {total} cells exceeds {SAMPLE_BUDGET}"
            )));
        }
        Ok(CellGrid {
            dim: d,
            lo: to_p4(&lov),
            hi: to_p4(&hiv),
            m,
            total,
            half_diag: diag.sqrt() / R::of(2.0),
        })
    }

    fn center(&self, flat: usize) -> P4<R> {
        let mut p = [R::zero(); 4];
        let mut rest = flat;
        for a in 0..self.dim {
            let k = rest % self.m[a];
            rest /= self.m[a];
            let u = (R::of_usize(k) + R::of(0.5)) / R::of_usize(self.m[a]);
            p[a] = lerp(self.lo[a], self.hi[a], u);
        }
        p
    }

    /// The covering point this cell contributes: its center when inside the
    /// body, the center's projection when the body passes nearby, nothing
    /// when the cell is entirely away from the body.
    fn keep(&self, body: &ConvexBody<R>, flat: usize) -> Option<P4<R>> {
        let c = self.center(flat);
        if body.contains_p4(&c) {
            return Some(c);
        }
        let p = body.project_p4(&c);
        let lim = self.half_diag * R::of(1.0 + 1e-9);
        if dist_sq(&c, &p, self.dim) <= lim * lim {
            Some(p)
        } else {
            None
        }
    }
}

/// A finite set of points in d dimensions, stored flat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NodeSetRepr<R>", into = "NodeSetRepr<R>", bound = "")]
pub struct NodeSet<R: Real> {
    dim: usize,
    coords: Vec<R>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct NodeSetRepr<R: Real> {
    dim: usize,
    points: Vec<Vec<R>>,
}

impl<R: Real> TryFrom<NodeSetRepr<R>> for NodeSet<R> {
    type Error = IsorecError;
    fn try_from(repr: NodeSetRepr<R>) -> Result<Self> {
        NodeSet::from_points(repr.dim, repr.points)
    }
}

impl<R: Real> From<NodeSet<R>> for NodeSetRepr<R> {
    fn from(xi: NodeSet<R>) -> Self {
        NodeSetRepr {
            dim: xi.dim,
            points: xi.iter().map(|p| p.to_vec()).collect(),
        }
    }
}

impl<R: Real> NodeSet<R> {
    /// Empty set in the given dimension; meant to be filled right away.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(IsorecError::Parameter(format!(
                "node dimension {dim} not in 1..=4"
            )));
        }
        Ok(NodeSet {
            dim,
            coords: Vec::new(),
        })
    }

    pub fn from_points(dim: usize, points: Vec<Vec<R>>) -> Result<Self> {
        let mut xi = NodeSet::new(dim)?;
        for p in &points {
            if p.len() != dim {
                return Err(IsorecError::Domain(format!(
                    "node of dimension {} in a set of dimension {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(IsorecError::Domain("node coordinates must be finite".into()));
            }
            xi.push(p);
        }
        Ok(xi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Panics on dimension mismatch; construction-time programming error.
    pub fn push(&mut self, p: &[R]) {
        assert_eq!(p.len(), self.dim, "node dimension mismatch");
        self.coords.extend_from_slice(p);
    }

    pub fn point(&self, i: usize) -> &[R] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[R]> {
        self.coords.chunks_exact(self.dim)
    }

    pub(crate) fn p4(&self, i: usize) -> P4<R> {
        to_p4(self.point(i))
    }
}

/// Smallest Euclidean distance from x to the node set.
pub fn dist_point_to_nodes<R: Real>(x: &[R], xi: &NodeSet<R>) -> Result<R> {
    if xi.is_empty() {
        return Err(IsorecError::Parameter(
            "distance to an empty node set is undefined".into(),
        ));
    }
    if x.len() != xi.dim() {
        return Err(IsorecError::Domain(format!(
            "point dimension {} does not match node dimension {}",
            x.len(),
            xi.dim()
        )));
    }
    let xp = to_p4(x);
    let mut best = R::infinity();
    for i in 0..xi.len() {
        best = best.min(dist_sq(&xp, &xi.p4(i), xi.dim()));
    }
    Ok(best.sqrt())
}

/// A lower estimate of a supremum distance together with a certified
/// additive slack: the true supremum lies in `[value, value + gap]`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct DistanceEstimate<R: Real> {
    pub value: R,
    pub gap: R,
    pub argmax: Vec<R>,
}

/// Uniform-grid nearest-neighbor accelerator over a node set.
///
/// Queries scan Chebyshev rings of cells outward from the query point and
/// stop once no unvisited cell can beat the best distance found.
pub struct NodeGrid<R: Real> {
    dim: usize,
    lo: P4<R>,
    h: R,
    shape: [usize; 4],
    starts: Vec<u32>,
    // node coordinates permuted into cell order, with original indices
    pts: Vec<R>,
    ids: Vec<u32>,
}

impl<R: Real> NodeGrid<R> {
    pub fn build(xi: &NodeSet<R>) -> Self {
        let n = xi.len();
        assert!(n > 0, "node grid over an empty set");
        let dim = xi.dim();
        let mut lo = xi.p4(0);
        let mut hi = xi.p4(0);
        for i in 1..n {
            let p = xi.p4(i);
            for a in 0..dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        // aim for about one node per cell, capped to bound memory
        let mut prod = 1.0f64;
        let mut d_pos = 0;
        let mut max_ext = 0.0f64;
        for a in 0..dim {
            let e = (hi[a] - lo[a]).as_f64();
            max_ext = max_ext.max(e);
            if e > 0.0 {
                prod *= e;
                d_pos += 1;
            }
        }
        let mut h = if d_pos == 0 {
            1.0
        } else {
            (prod / n as f64).powf(1.0 / d_pos as f64).max(max_ext * 1e-12)
        };
        let cap = 8 * n + 1024;
        let mut shape = [1usize; 4];
        let mut total;
        loop {
            total = 1usize;
            for a in 0..dim {
                shape[a] = count_ceil(hi[a] - lo[a], R::of(h));
                total = total.saturating_mul(shape[a]);
            }
            if total <= cap {
                break;
            }
            h *= ((total as f64) / cap as f64).powf(1.0 / d_pos.max(1) as f64) * 1.0001;
        }
        let hr = R::of(h);
        let cell_of = |p: &P4<R>| -> usize {
            let mut flat = 0usize;
            let mut stride = 1usize;
            for a in 0..dim {
                let f = ((p[a] - lo[a]) / hr).floor().as_f64() as isize;
                let i = f.clamp(0, shape[a] as isize - 1) as usize;
                flat += i * stride;
                stride *= shape[a];
            }
            flat
        };
        let mut counts = vec![0u32; total + 1];
        for i in 0..n {
            counts[cell_of(&xi.p4(i)) + 1] += 1;
        }
        for c in 1..=total {
            counts[c] += counts[c - 1];
        }
        let starts = counts.clone();
        let mut pts = vec![R::zero(); n * dim];
        let mut ids = vec![0u32; n];
        let mut fill = counts;
        for i in 0..n {
            let c = cell_of(&xi.p4(i));
            let slot = fill[c] as usize;
            fill[c] += 1;
            pts[slot * dim..(slot + 1) * dim].copy_from_slice(xi.point(i));
            ids[slot] = i as u32;
        }
        NodeGrid {
            dim,
            lo,
            h: hr,
            shape,
            starts,
            pts,
            ids,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn nearest_dist(&self, x: &[R]) -> R {
        assert_eq!(x.len(), self.dim);
        self.nearest_p4(&to_p4(x)).0
    }

    /// Distance and original node index of a nearest node; ties resolve to
    /// the smallest index.
    pub fn nearest(&self, x: &[R]) -> (R, usize) {
        assert_eq!(x.len(), self.dim);
        self.nearest_p4(&to_p4(x))
    }

    pub(crate) fn nearest_p4(&self, x: &P4<R>) -> (R, usize) {
        let dim = self.dim;
        let mut c = [0isize; 4];
        // distance from x to the clamped cell's box, for the stop bound
        let mut off_sq = R::zero();
        for a in 0..dim {
            let f = (x[a] - self.lo[a]) / self.h;
            let i = (f.floor().as_f64() as isize).clamp(0, self.shape[a] as isize - 1);
            c[a] = i;
            let fi = R::of(i as f64);
            let gap = if f < fi {
                (fi - f) * self.h
            } else if f > fi + R::one() {
                (f - fi - R::one()) * self.h
            } else {
                R::zero()
            };
            off_sq = off_sq + gap * gap;
        }
        let off = off_sq.sqrt();
        let mut best = (R::infinity(), u32::MAX);
        let mut max_ring = 0isize;
        for a in 0..dim {
            max_ring = max_ring.max(c[a]).max(self.shape[a] as isize - 1 - c[a]);
        }
        for ring in 0..=max_ring {
            self.scan_ring(&c, ring, x, &mut best);
            if best.0 < R::infinity() {
                // any unvisited cell is at Chebyshev distance > ring, hence
                // geometrically at least ring*h - off away
                let bound = R::of(ring as f64) * self.h - off;
                if bound > R::zero() && best.0 <= bound * bound {
                    break;
                }
            }
        }
        (best.0.sqrt(), best.1 as usize)
    }

    fn scan_ring(&self, c: &[isize; 4], ring: isize, x: &P4<R>, best: &mut (R, u32)) {
        let dim = self.dim;
        let mut lo = [0isize; 4];
        let mut hi = [0isize; 4];
        for a in 0..dim {
            lo[a] = (c[a] - ring).max(0);
            hi[a] = (c[a] + ring).min(self.shape[a] as isize - 1);
            if lo[a] > hi[a] {
                return;
            }
        }
        let mut idx = lo;
        'cells: loop {
            let mut cheb = 0isize;
            let mut flat = 0usize;
            let mut stride = 1usize;
            for a in 0..dim {
                cheb = cheb.max((idx[a] - c[a]).abs());
                flat += idx[a] as usize * stride;
                stride *= self.shape[a];
            }
            if cheb == ring {
                let s = self.starts[flat] as usize;
                let e = self.starts[flat + 1] as usize;
                for slot in s..e {
                    let base = slot * dim;
                    let mut d2 = R::zero();
                    for a in 0..dim {
                        let d = x[a] - self.pts[base + a];
                        d2 = d2 + d * d;
                    }
                    let id = self.ids[slot];
                    if d2 < best.0 || (d2 == best.0 && id < best.1) {
                        *best = (d2, id);
                    }
                }
            }
            let mut a = 0;
            loop {
                if a == dim {
                    break 'cells;
                }
                idx[a] += 1;
                if idx[a] <= hi[a] {
                    break;
                }
                idx[a] = lo[a];
                a += 1;
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Cand<R: Real> {
    e: R,
    p: P4<R>,
}

/// True when b beats a: larger distance, ties to the lexicographically
/// smaller witness so parallel reductions are order-independent.
fn beats<R: Real>(b: &Cand<R>, a: &Cand<R>, dim: usize) -> bool {
    if b.e != a.e {
        return b.e > a.e;
    }
    lex_cmp(&b.p, &a.p, dim) == std::cmp::Ordering::Less
}

fn combine<R: Real>(a: Option<Cand<R>>, b: Option<Cand<R>>, dim: usize) -> Option<Cand<R>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if beats(&y, &x, dim) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// One representative per hash cell, chosen as the lexicographically
/// smallest point so the result is independent of input order; the output is
/// sorted for the same reason.
fn thin_pool<R: Real>(pool: Vec<Cand<R>>, cell: R, dim: usize) -> Vec<Cand<R>> {
    let mut map: std::collections::HashMap<[i64; 4], Cand<R>> =
        std::collections::HashMap::with_capacity(pool.len().min(1 << 20));
    for c in pool {
        let mut key = [0i64; 4];
        for a in 0..dim {
            key[a] = (c.p[a] / cell).floor().as_f64() as i64;
        }
        map.entry(key)
            .and_modify(|cur| {
                if lex_cmp(&c.p, &cur.p, dim) == std::cmp::Ordering::Less {
                    *cur = c;
                }
            })
            .or_insert(c);
    }
    let mut out: Vec<Cand<R>> = map.into_values().collect();
    out.sort_by(|a, b| lex_cmp(&a.p, &b.p, dim));
    out
}

/// Certified estimate of `e(Omega, xi)`, the one-sided Hausdorff distance of
/// the body to the node set.
pub fn one_sided_hausdorff<R: Real>(
    body: &ConvexBody<R>,
    xi: &NodeSet<R>,
    resolution: R,
) -> Result<DistanceEstimate<R>> {
    hausdorff_impl(body, xi, resolution, false)
}

/// Certified estimate of `e(boundary Omega, xi)`; candidates stay on the
/// boundary throughout refinement.
pub fn one_sided_hausdorff_boundary<R: Real>(
    body: &ConvexBody<R>,
    xi: &NodeSet<R>,
    resolution: R,
) -> Result<DistanceEstimate<R>> {
    hausdorff_impl(body, xi, resolution, true)
}

fn hausdorff_impl<R: Real>(
    body: &ConvexBody<R>,
    xi: &NodeSet<R>,
    resolution: R,
    boundary: bool,
) -> Result<DistanceEstimate<R>> {
    body.validate()?;
    if !(resolution > R::zero()) || !resolution.is_finite() {
        return Err(IsorecError::Parameter(
            "resolution must be positive and finite".into(),
        ));
    }
    if xi.is_empty() {
        return Err(IsorecError::Parameter(
            "one-sided Hausdorff distance needs a non-empty node set".into(),
        ));
    }
    if xi.dim() != body.dim() {
        return Err(IsorecError::Domain(format!(
            "node dimension {} does not match body dimension {}",
            xi.dim(),
            body.dim()
        )));
    }
    let dim = body.dim();
    let tol = R::of(1e-7) * (R::one() + body.diameter_bound());
    for i in 0..xi.len() {
        let p = xi.p4(i);
        let q = body.project_p4(&p);
        if dist_sq(&p, &q, dim).sqrt() > tol {
            return Err(IsorecError::Parameter(format!(
                "node {i} lies outside the body"
            )));
        }
    }

    let grid = NodeGrid::build(xi);
    let bnd = body.boundary_sample_p4(resolution)?;
    let cells = if boundary {
        None
    } else {
        Some(CellGrid::build(body, resolution)?)
    };
    let interior_total = cells.as_ref().map_or(0, |g| g.total);
    let mut spent = interior_total.saturating_add(bnd.len());
    if spent > SAMPLE_BUDGET {
        return Err(IsorecError::Budget(format!(
            "level-0 sweep of {spent} samples exceeds {SAMPLE_BUDGET}"
        )));
    }

    let eval = |p: P4<R>| Cand {
        e: grid.nearest_p4(&p).0,
        p,
    };
    let interior_cand = |flat: usize| -> Option<Cand<R>> {
        cells
            .as_ref()
            .and_then(|g| g.keep(body, flat))
            .map(eval)
    };

    // level 0: global covering sweep, max first, then the survivors that
    // could still hide the supremum
    let best_bnd = bnd
        .par_iter()
        .map(|p| Some(eval(*p)))
        .reduce(|| None, |a, b| combine(a, b, dim));
    let best_int = (0..interior_total)
        .into_par_iter()
        .map(interior_cand)
        .reduce(|| None, |a, b| combine(a, b, dim));
    let mut best = combine(best_bnd, best_int, dim).expect("non-empty sample sweep");

    // Survivor pools are thinned to one representative per hash cell of side
    // radius/2, so a dropped survivor sits within sqrt(d)*radius/2 <= radius
    // of its representative and each representative stands in for a ball of
    // effective radius at most 2*radius. The child stencils below are sized
    // to cover that inflated ball at half dispersion: step radius/2 over
    // {-4..4}^d inside the body, step radius/4 over {-8..8}^d on the
    // boundary where reprojection can double a perturbation.
    let mut radius = resolution;
    let mut pool: Vec<Cand<R>> = bnd
        .par_iter()
        .map(|p| eval(*p))
        .filter(|c| c.e + radius > best.e)
        .collect();
    pool.par_extend(
        (0..interior_total)
            .into_par_iter()
            .filter_map(interior_cand)
            .filter(|c| c.e + radius > best.e),
    );
    pool = thin_pool(pool, radius / R::of(2.0), dim);
    drop(bnd);

    let reach = if boundary { 8isize } else { 4isize };
    let step_div = if boundary { R::of(4.0) } else { R::of(2.0) };
    let side = (2 * reach + 1) as usize;
    let mut stencil: Vec<[isize; 4]> = Vec::with_capacity(side.pow(dim as u32));
    odometer(&vec![side; dim], |idx| {
        let mut v = [0isize; 4];
        for a in 0..dim {
            v[a] = idx[a] as isize - reach;
        }
        stencil.push(v);
    });

    for level in 0..3 {
        let child_r = radius / R::of(2.0);
        let step = radius / step_div;
        spent = spent.saturating_add(pool.len().saturating_mul(stencil.len()));
        if spent > SAMPLE_BUDGET {
            return Err(IsorecError::Budget(format!(
                "refinement sweep would exceed {SAMPLE_BUDGET} samples"
            )));
        }
        let child = |parent: &Cand<R>, v: &[isize; 4]| -> Cand<R> {
            let mut q = parent.p;
            for a in 0..dim {
                q[a] = q[a] + step * R::of(v[a] as f64);
            }
            let q = if boundary {
                body.project_boundary_p4(&q)
            } else if body.contains_p4(&q) {
                q
            } else {
                body.project_p4(&q)
            };
            eval(q)
        };
        let level_best = pool
            .par_iter()
            .map(|parent| {
                stencil
                    .iter()
                    .map(|v| child(parent, v))
                    .fold(None, |acc, c| combine(acc, Some(c), dim))
            })
            .reduce(|| None, |a, b| combine(a, b, dim));
        if let Some(c) = level_best {
            if beats(&c, &best, dim) {
                best = c;
            }
        }
        // after the last pass every point is within child_r of an evaluated
        // child or under a pruning bound, so no pool is needed
        if level < 2 {
            let survivors: Vec<Cand<R>> = pool
                .par_iter()
                .flat_map_iter(|parent| stencil.iter().map(move |v| child(parent, v)))
                .filter(|c| c.e + child_r > best.e)
                .collect();
            pool = thin_pool(survivors, child_r / R::of(2.0), dim);
        }
        radius = child_r;
    }

    Ok(DistanceEstimate {
        value: best.e,
        gap: resolution / R::of(8.0),
        argmax: best.p[..dim].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexBody<f64> {
        ConvexBody::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn contains_closed_membership() {
        let sq = unit_square();
        assert!(sq.contains(&[0.5, 0.5]).unwrap());
        assert!(sq.contains(&[1.0, 1.0]).unwrap());
        assert!(!sq.contains(&[1.0 + 1e-12, 0.5]).unwrap());
        let ball = ConvexBody::Ball {
            center: vec![0.0, 0.0, 0.0],
            radius: 1.0,
        };
        assert!(ball.contains(&[0.0, 0.0, 1.0]).unwrap());
        assert!(!ball.contains(&[0.0, 0.0, 1.001]).unwrap());
        assert!(sq.contains(&[0.5]).is_err());
    }

    #[test]
    fn polygon_membership_and_validation() {
        let tri = ConvexBody::Polygon2D {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        tri.validate().unwrap();
        assert!(tri.contains(&[0.25, 0.25]).unwrap());
        assert!(tri.contains(&[0.5, 0.5]).unwrap());
        assert!(!tri.contains(&[0.6, 0.6]).unwrap());
        // clockwise ordering is rejected
        let cw = ConvexBody::Polygon2D {
            vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
        };
        assert!(matches!(cw.validate(), Err(IsorecError::Domain(_))));
        // a collinear vertex is not strictly convex
        let flat = ConvexBody::Polygon2D {
            vertices: vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(matches!(flat.validate(), Err(IsorecError::Domain(_))));
    }

    #[test]
    fn volume_formulas() {
        assert_eq!(unit_square().volume(), 1.0);
        let ball = ConvexBody::Ball {
            center: vec![1.0, 2.0, 3.0],
            radius: 2.0,
        };
        assert!(close(
            ball.volume(),
            4.0 / 3.0 * std::f64::consts::PI * 8.0,
            1e-15
        ));
        let tri = ConvexBody::Polygon2D {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(close(tri.volume(), 0.5, 1e-15));
        // shoelace is invariant under rotating the vertex list
        let rot = ConvexBody::Polygon2D {
            vertices: vec![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
        };
        assert_eq!(tri.volume(), rot.volume());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!(close(unit_ball_volume::<f64>(1), 2.0, 1e-15));
        assert!(close(unit_ball_volume::<f64>(2), std::f64::consts::PI, 1e-15));
        assert!(close(
            unit_ball_volume::<f64>(3),
            4.0 / 3.0 * std::f64::consts::PI,
            1e-15
        ));
        assert!(close(
            unit_ball_volume::<f64>(4),
            std::f64::consts::PI * std::f64::consts::PI / 2.0,
            1e-15
        ));
    }

    #[test]
    fn node_distances() {
        let xi = NodeSet::from_points(2, vec![vec![3.0, 4.0]]).unwrap();
        assert!(close(dist_point_to_nodes(&[0.0, 0.0], &xi).unwrap(), 5.0, 1e-15));
        assert_eq!(dist_point_to_nodes(&[3.0, 4.0], &xi).unwrap(), 0.0);
        let xi2 = NodeSet::from_points(2, vec![vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!(close(dist_point_to_nodes(&[0.0, 0.0], &xi2).unwrap(), 1.0, 1e-15));
        let empty = NodeSet::<f64>::new(2).unwrap();
        assert!(matches!(
            dist_point_to_nodes(&[0.0, 0.0], &empty),
            Err(IsorecError::Parameter(_))
        ));
    }

    #[test]
    fn projection_examples() {
        let sq = unit_square();
        assert_eq!(sq.project(&[2.0, 0.5]), vec![1.0, 0.5]);
        assert_eq!(sq.project(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(sq.project_to_boundary(&[0.5, 0.1]), vec![0.5, 0.0]);
        let ball: ConvexBody<f64> = ConvexBody::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert_eq!(ball.project(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = ball.project_to_boundary(&[0.3, 0.4]);
        assert!(close(p[0].hypot(p[1]), 1.0, 1e-15));
        let tri = ConvexBody::Polygon2D {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        let q = tri.project(&[1.0, 1.0]);
        assert!(close(q[0], 0.5, 1e-12) && close(q[1], 0.5, 1e-12));
    }

    #[test]
    fn boundary_samples_hit_landmarks() {
        let sq = unit_square();
        let pts = sq.boundary_sample(0.5).unwrap();
        for corner in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
            assert!(pts.iter().any(|p| p[0] == corner[0] && p[1] == corner[1]));
        }
        // no duplicates after the shared-corner merge
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        assert_eq!(sorted.len(), pts.len());

        let circle: ConvexBody<f64> = ConvexBody::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let pts = circle.boundary_sample(2.0 * std::f64::consts::PI / 10.0).unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            assert!(close(p[0].hypot(p[1]), 1.0, 1e-15));
        }

        let tri = ConvexBody::Polygon2D {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        let pts = tri.boundary_sample(0.4).unwrap();
        // edge (0,0)-(1,0) has length 1: ceil(1/0.4)+1 = 4 points with both ends
        let on_bottom = pts.iter().filter(|p| p[1] == 0.0).count();
        assert_eq!(on_bottom, 4);
    }

    #[test]
    fn sphere_sample_stays_on_sphere() {
        let ball: ConvexBody<f64> = ConvexBody::Ball {
            center: vec![1.0, -2.0, 0.5],
            radius: 1.5,
        };
        let pts = ball.boundary_sample(0.4).unwrap();
        assert!(pts.len() > 50);
        for p in &pts {
            let r = ((p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2) + (p[2] - 0.5).powi(2)).sqrt();
            assert!(close(r, 1.5, 1e-14));
        }
    }

    #[test]
    fn node_grid_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=4usize {
            let mut xi = NodeSet::new(dim).unwrap();
            for _ in 0..137 {
                let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..2.0)).collect();
                xi.push(&p);
            }
            let grid = NodeGrid::build(&xi);
            for _ in 0..200 {
                let q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..3.0)).collect();
                let brute = dist_point_to_nodes(&q, &xi).unwrap();
                let fast = grid.nearest_dist(&q);
                assert_eq!(fast, brute, "dim {dim}");
            }
        }
    }

    #[test]
    fn hausdorff_square_center_node() {
        let sq = unit_square();
        let xi = NodeSet::from_points(2, vec![vec![0.5, 0.5]]).unwrap();
        let est = one_sided_hausdorff(&sq, &xi, 0.01).unwrap();
        let exact = 0.5f64.hypot(0.5);
        assert!(close(est.value, exact, 1e-12));
        assert_eq!(est.gap, 0.01 / 8.0);
        assert_eq!(est.argmax, vec![0.0, 0.0]);

        let bnd = one_sided_hausdorff_boundary(&sq, &xi, 0.01).unwrap();
        assert!(close(bnd.value, exact, 1e-12));
    }

    #[test]
    fn hausdorff_square_four_nodes() {
        let sq = unit_square();
        let xi = NodeSet::from_points(
            2,
            vec![
                vec![0.25, 0.25],
                vec![0.75, 0.25],
                vec![0.25, 0.75],
                vec![0.75, 0.75],
            ],
        )
        .unwrap();
        let est = one_sided_hausdorff(&sq, &xi, 0.02).unwrap();
        // brute-force reference over a fine grid: sqrt(2)/4 at the corners
        let reference = 0.3535533905932738;
        assert!(est.value <= reference + 1e-12);
        assert!(reference <= est.value + est.gap);
        assert!(close(est.value, reference, 1e-9));
    }

    #[test]
    fn hausdorff_respects_budget() {
        let sq = unit_square();
        let xi = NodeSet::from_points(2, vec![vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            one_sided_hausdorff(&sq, &xi, 5e-6),
            Err(IsorecError::Budget(_))
        ));
    }

    #[test]
    fn hausdorff_rejects_outside_nodes() {
        let sq = unit_square();
        let xi = NodeSet::from_points(2, vec![vec![1.5, 0.5]]).unwrap();
        assert!(matches!(
            one_sided_hausdorff(&sq, &xi, 0.05),
            Err(IsorecError::Parameter(_))
        ));
    }

    #[test]
    fn hausdorff_ball_interior_target() {
        // single node at the center of a disc: e = r exactly on the boundary
        let ball = ConvexBody::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let xi = NodeSet::from_points(2, vec![vec![0.0, 0.0]]).unwrap();
        let est = one_sided_hausdorff(&ball, &xi, 0.02).unwrap();
        assert!(est.value <= 1.0 + 1e-12 && 1.0 <= est.value + est.gap);
        let bnd = one_sided_hausdorff_boundary(&ball, &xi, 0.02).unwrap();
        assert!(close(bnd.value, 1.0, 1e-12));
    }

    #[test]
    fn body_json_round_trip() {
        let bodies: Vec<ConvexBody<f64>> = vec![
            unit_square(),
            ConvexBody::Ball {
                center: vec![0.0, 1.0, 2.0],
                radius: 0.5,
            },
            ConvexBody::Polygon2D {
                vertices: vec![[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]],
            },
        ];
        for body in bodies {
            let json = serde_json::to_string(&body).unwrap();
            let back: ConvexBody<f64> = serde_json::from_str(&json).unwrap();
            assert_eq!(body, back);
        }
        let tagged: ConvexBody<f64> =
            serde_json::from_str(r#"{"type":"box","lo":[0,0],"hi":[1,1]}"#).unwrap();
        assert_eq!(tagged, unit_square());
    }

    #[test]
    fn node_set_json_rejects_mismatched_dims() {
        let good: NodeSet<f64> =
            serde_json::from_str(r#"{"dim":2,"points":[[0.0,0.0],[1.0,1.0]]}"#).unwrap();
        assert_eq!(good.len(), 2);
        let bad: std::result::Result<NodeSet<f64>, _> =
            serde_json::from_str(r#"{"dim":2,"points":[[0.0,0.0,0.0]]}"#);
        assert!(bad.is_err());
    }
}
