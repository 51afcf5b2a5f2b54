//! Near-optimal node construction.
//!
//! Three layers build on each other: the covering-density table and the
//! covering-radius asymptotic `(dens(d) mu / (n nu_d))^{1/d}`; approximate
//! n-centers (greedy farthest-point insertion polished by a minimax Lloyd
//! loop); and the combined node sets that add a uniform net on the boundary
//! so that `e(dOmega, xi) <= theta * e(Omega, xi)` holds with a certified
//! margin. The boundary net spacing is chosen by a small fixed-point
//! iteration balancing the boundary node budget against the interior
//! covering radius the remaining nodes can reach, then verified a
//! posteriori with certified distance estimates; the spacing is densified
//! and the set rebuilt if the check fails.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{IsorecError, Result};
use crate::geometry::{
    dist_sq, one_sided_hausdorff, one_sided_hausdorff_boundary, unit_ball_volume, ConvexBody,
    DistanceEstimate, NodeGrid, NodeSet, P4, MAX_DIM,
};
use crate::scalar::Real;

/// How a covering-density value is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityStatus {
    /// Proven optimal.
    Exact,
    /// Best known upper bound (a lattice covering); the optimum is open.
    BestKnownUpper,
}

/// Least density of coverings of `R^d` by congruent balls, for d = 1..=4.
///
/// d = 1 is trivial (intervals tile the line) and d = 2 is the hexagonal
/// lattice value `2 pi / sqrt(27)`; both are exact. For d = 3 (bcc lattice,
/// `5 sqrt(5) pi / 24`) and d = 4 (the A4* lattice, `2 sqrt(5) pi^2 / 25`)
/// only upper bounds are known and the entries are flagged.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct CoveringConstants<R: Real> {
    entries: [(R, DensityStatus); MAX_DIM],
}

impl<R: Real> CoveringConstants<R> {
    pub fn standard() -> Self {
        use std::f64::consts::PI;
        let sqrt5 = 5.0f64.sqrt();
        CoveringConstants {
            entries: [
                (R::one(), DensityStatus::Exact),
                (R::of(2.0 * PI / 27.0f64.sqrt()), DensityStatus::Exact),
                (R::of(5.0 * sqrt5 * PI / 24.0), DensityStatus::BestKnownUpper),
                (R::of(2.0 * sqrt5 * PI * PI / 25.0), DensityStatus::BestKnownUpper),
            ],
        }
    }

    pub fn lookup(&self, d: usize) -> Result<(R, DensityStatus)> {
        if d == 0 || d > MAX_DIM {
            return Err(IsorecError::Domain(format!(
                "covering density table supports dimensions 1 through {MAX_DIM}, got {d}"
            )));
        }
        Ok(self.entries[d - 1])
    }
}

/// Covering density of dimension `d` with its status flag.
pub fn dens_lookup<R: Real>(d: usize) -> Result<(R, DensityStatus)> {
    CoveringConstants::standard().lookup(d)
}

/// Leading term of the n-th covering radius of the body:
/// `(dens(d) mu_d(Omega) / (n nu_d))^{1/d}`.
pub fn en_asymptotic<R: Real>(body: &ConvexBody<R>, n: usize) -> Result<R> {
    body.validate()?;
    if n == 0 {
        return Err(IsorecError::Parameter("n must be at least 1".into()));
    }
    let d = body.dim();
    let (dens, _) = dens_lookup::<R>(d)?;
    let ratio = dens * body.volume() / (R::of_usize(n) * unit_ball_volume::<R>(d));
    Ok(ratio.powf(R::one() / R::of_usize(d)))
}

fn nodeset_from_p4<R: Real>(dim: usize, pts: &[P4<R>]) -> NodeSet<R> {
    let mut ns = NodeSet::new(dim).expect("dimension already validated");
    for p in pts {
        ns.push(&p[..dim]);
    }
    ns
}

/// Index of the maximum entry; ties resolve to the smallest index.
fn par_argmax<R: Real>(v: &[R]) -> usize {
    v.par_iter()
        .enumerate()
        .map(|(i, &d)| (d, i))
        .reduce(
            || (R::neg_infinity(), usize::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        )
        .1
}

/// Sample index with the largest distance to the boundary: a sampled stand-in
/// for the Chebyshev center.
fn deepest_sample<R: Real>(body: &ConvexBody<R>, samples: &[P4<R>]) -> usize {
    let dim = body.dim();
    let depth: Vec<R> = samples
        .par_iter()
        .map(|p| {
            let b = body.project_boundary_p4(p);
            dist_sq(p, &b, dim)
        })
        .collect();
    par_argmax(&depth)
}

/// Farthest-point insertion: repeatedly add the sample farthest from the
/// current set. `init` seeds the distance field without being returned;
/// `first` forces the first inserted sample when `init` is empty.
fn farthest_insertion<R: Real>(
    samples: &[P4<R>],
    dim: usize,
    init: &[P4<R>],
    first: Option<usize>,
    count: usize,
) -> Vec<P4<R>> {
    let mut dist: Vec<R> = if init.is_empty() {
        vec![R::infinity(); samples.len()]
    } else {
        let grid = NodeGrid::build(&nodeset_from_p4(dim, init));
        samples.par_iter().map(|p| grid.nearest_p4(p).0).collect()
    };
    let mut out = Vec::with_capacity(count);
    let mut forced = first;
    for _ in 0..count {
        let idx = match forced.take() {
            Some(i) => i,
            None => par_argmax(&dist),
        };
        let p = samples[idx];
        out.push(p);
        dist.par_iter_mut().zip(samples.par_iter()).for_each(|(d, s)| {
            let dn = dist_sq(s, &p, dim).sqrt();
            if dn < *d {
                *d = dn;
            }
        });
    }
    out
}

/// Approximate center of the smallest ball enclosing the listed samples:
/// step `1/(i+1)` toward the current farthest point (Badoiu-Clarkson).
fn minimax_center<R: Real>(all: &[P4<R>], cell: &[u32], dim: usize, start: P4<R>) -> P4<R> {
    let mut c = start;
    for i in 1..=96usize {
        let mut best = (dist_sq(&all[cell[0] as usize], &c, dim), 0usize);
        for (j, &si) in cell.iter().enumerate().skip(1) {
            let d = dist_sq(&all[si as usize], &c, dim);
            if d > best.0 {
                best = (d, j);
            }
        }
        let f = all[cell[best.1] as usize];
        let t = R::one() / R::of_usize(i + 1);
        for a in 0..dim {
            c[a] = c[a] + (f[a] - c[a]) * t;
        }
    }
    c
}

/// Minimax Lloyd loop. Samples are assigned to their nearest node; each
/// non-frozen node moves to the minimax center of its assigned samples,
/// projected back into the body. Returns the iterate with the smallest
/// sampled objective `max(e_interior, e_boundary / bnd_weight)`, so the
/// sampled covering radius never degrades.
fn lloyd_core<R: Real>(
    body: &ConvexBody<R>,
    mut nodes: Vec<P4<R>>,
    frozen: &[bool],
    samples: &[P4<R>],
    bnd_samples: &[P4<R>],
    iterations: usize,
    bnd_weight: Option<R>,
) -> Vec<P4<R>> {
    let dim = body.dim();
    let si = samples.len();
    let all: Vec<P4<R>> = samples.iter().chain(bnd_samples.iter()).copied().collect();
    let mut best = nodes.clone();
    let mut best_obj = R::infinity();
    let move_tol = R::of(1e-6);
    let mut remaining = iterations;
    loop {
        let grid = NodeGrid::build(&nodeset_from_p4(dim, &nodes));
        let assign: Vec<(R, u32)> = all
            .par_iter()
            .map(|p| {
                let (d, id) = grid.nearest_p4(p);
                (d, id as u32)
            })
            .collect();
        let maxd = |r: &[(R, u32)]| {
            r.par_iter()
                .map(|x| x.0)
                .reduce(R::zero, |a, b| a.max(b))
        };
        let e_int = maxd(&assign[..si]);
        let e_bnd = maxd(&assign[si..]);
        let obj = match bnd_weight {
            Some(w) => e_int.max(e_bnd / w),
            None => e_int.max(e_bnd),
        };
        if obj < best_obj {
            best_obj = obj;
            best.clone_from(&nodes);
        }
        if remaining == 0 {
            break;
        }
        remaining -= 1;
        let mut cells: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
        for (i, &(_, id)) in assign.iter().enumerate() {
            cells[id as usize].push(i as u32);
        }
        let moved: Vec<P4<R>> = (0..nodes.len())
            .into_par_iter()
            .map(|j| {
                if frozen[j] || cells[j].is_empty() {
                    return nodes[j];
                }
                let c = minimax_center(&all, &cells[j], dim, nodes[j]);
                body.project_p4(&c)
            })
            .collect();
        let mut movement = R::zero();
        for (a, b) in nodes.iter().zip(moved.iter()) {
            movement = movement.max(dist_sq(a, b, dim).sqrt());
        }
        nodes = moved;
        if movement < move_tol {
            remaining = 0; // evaluate the final position, then stop
        }
    }
    best
}

/// Movable nodes ranked by redundancy: smallest slack in the node's own
/// cell plus distance to its nearest sibling, so crowded over-covered nodes
/// donate first when a swap needs a free node.
fn redundancy_order<R: Real>(
    nodes: &[P4<R>],
    frozen: &[bool],
    dim: usize,
    all: &[P4<R>],
) -> Vec<usize> {
    let grid = NodeGrid::build(&nodeset_from_p4(dim, nodes));
    let mut mad = vec![R::zero(); nodes.len()];
    for p in all {
        let (d, id) = grid.nearest_p4(p);
        if d > mad[id] {
            mad[id] = d;
        }
    }
    let mut scored: Vec<(R, usize)> = (0..nodes.len())
        .filter(|&j| !frozen[j])
        .map(|j| {
            let mut nn = R::infinity();
            for l in 0..nodes.len() {
                if l != j {
                    nn = nn.min(dist_sq(&nodes[j], &nodes[l], dim));
                }
            }
            (mad[j] + nn.sqrt(), j)
        })
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, j)| j).collect()
}

/// Approximate n-centers: farthest-point insertion seeded at the deepest
/// sample (a Chebyshev-center stand-in), then a minimax Lloyd polish.
/// Deterministic given the inputs; `seed` is accepted for interface
/// stability and not consumed.
pub fn greedy_farthest_point<R: Real>(
    body: &ConvexBody<R>,
    n: usize,
    seed: u64,
    resolution: R,
) -> Result<NodeSet<R>> {
    let _ = seed;
    body.validate()?;
    if n == 0 {
        return Err(IsorecError::Parameter("n must be at least 1".into()));
    }
    let dim = body.dim();
    let samples = body.interior_cover(resolution)?;
    if samples.len() < n {
        return Err(IsorecError::Parameter(format!(
            "resolution {} yields only {} samples for {} nodes; refine it",
            resolution,
            samples.len(),
            n
        )));
    }
    let start = deepest_sample(body, &samples);
    let nodes = farthest_insertion(&samples, dim, &[], Some(start), n);
    let frozen = vec![false; n];
    let polished = lloyd_core(body, nodes, &frozen, &samples, &[], 120, None);
    Ok(nodeset_from_p4(dim, &polished))
}

/// Minimax Lloyd refinement of an existing node set over a fresh covering
/// sample of the body. The sampled covering radius never increases; the
/// loop stops early once the largest node movement drops below 1e-6.
pub fn lloyd_refine<R: Real>(
    body: &ConvexBody<R>,
    xi: &NodeSet<R>,
    iterations: usize,
    resolution: R,
) -> Result<NodeSet<R>> {
    body.validate()?;
    if xi.is_empty() {
        return Err(IsorecError::Parameter("node set must be non-empty".into()));
    }
    if iterations == 0 {
        return Err(IsorecError::Parameter("iterations must be at least 1".into()));
    }
    let dim = body.dim();
    if xi.dim() != dim {
        return Err(IsorecError::Domain(format!(
            "node dimension {} does not match body dimension {}",
            xi.dim(),
            dim
        )));
    }
    let samples = body.interior_cover(resolution)?;
    let nodes: Vec<P4<R>> = (0..xi.len()).map(|i| xi.p4(i)).collect();
    let frozen = vec![false; nodes.len()];
    let polished = lloyd_core(body, nodes, &frozen, &samples, &[], iterations, None);
    Ok(nodeset_from_p4(dim, &polished))
}

/// Greedy scan: accept a candidate iff its distance to every accepted point
/// exceeds `epsilon`. The result is epsilon-separated, and every rejected
/// candidate lies within epsilon of an accepted one.
pub fn maximal_separated_set<R: Real>(candidates: &NodeSet<R>, epsilon: R) -> Result<NodeSet<R>> {
    if !(epsilon > R::zero()) || !epsilon.is_finite() {
        return Err(IsorecError::Parameter(
            "epsilon must be positive and finite".into(),
        ));
    }
    let dim = candidates.dim();
    let eps_sq = epsilon * epsilon;
    // hash accepted points on a grid of cell size epsilon: any point within
    // epsilon lives in the same or an adjacent cell
    let key = |p: &P4<R>| -> [i64; 4] {
        let mut k = [0i64; 4];
        for a in 0..dim {
            k[a] = (p[a] / epsilon).floor().as_f64().clamp(-9e15, 9e15) as i64;
        }
        k
    };
    let mut accepted: Vec<P4<R>> = Vec::new();
    let mut cells: std::collections::HashMap<[i64; 4], Vec<u32>> = std::collections::HashMap::new();
    'cand: for i in 0..candidates.len() {
        let p = candidates.p4(i);
        let k0 = key(&p);
        let span = |a: usize| if a < dim { -1i64..=1 } else { 0..=0 };
        for d0 in span(0) {
            for d1 in span(1) {
                for d2 in span(2) {
                    for d3 in span(3) {
                        let k = [k0[0] + d0, k0[1] + d1, k0[2] + d2, k0[3] + d3];
                        if let Some(v) = cells.get(&k) {
                            for &j in v {
                                if dist_sq(&p, &accepted[j as usize], dim) <= eps_sq {
                                    continue 'cand;
                                }
                            }
                        }
                    }
                }
            }
        }
        cells.entry(k0).or_default().push(accepted.len() as u32);
        accepted.push(p);
    }
    Ok(nodeset_from_p4(dim, &accepted))
}

/// Node set with a dedicated boundary net, plus its certified radii.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct NodeGenReport<R: Real> {
    pub nodes: NodeSet<R>,
    pub e_omega: DistanceEstimate<R>,
    pub e_boundary: DistanceEstimate<R>,
    /// Number of boundary-net nodes (always below the total).
    pub k_n: usize,
    pub theta: R,
    pub seed: u64,
}

impl<R: Real> NodeGenReport<R> {
    /// Certified check of `e(dOmega, xi) <= theta * e(Omega, xi)`: the
    /// boundary estimate plus its gap stays below theta times the interior
    /// value (itself a lower bound on the true radius).
    pub fn boundary_condition_ok(&self) -> bool {
        self.e_boundary.value + self.e_boundary.gap <= self.theta * self.e_omega.value
    }
}

/// Dispersion of the boundary net per unit spacing, used only to steer the
/// budget split; the certificates come from the distance estimates.
fn boundary_net_factor<R: Real>(body: &ConvexBody<R>) -> R {
    let d = body.dim();
    match body {
        ConvexBody::Box { .. } => {
            if d <= 2 {
                R::of(0.5)
            } else {
                R::of((d - 1) as f64).sqrt() * R::of(0.5)
            }
        }
        ConvexBody::Ball { .. } => {
            if d <= 2 {
                R::of(0.5)
            } else {
                R::of(0.55)
            }
        }
        ConvexBody::Polygon2D { .. } => R::of(0.5),
    }
}

/// Volume left after eroding the body by depth `w`, floored at 2% so the
/// planner never divides by a vanishing interior.
fn inset_volume<R: Real>(body: &ConvexBody<R>, w: R) -> R {
    let floor = R::of(0.02);
    match body {
        ConvexBody::Box { lo, hi } => {
            let mut v = R::one();
            for (l, h) in lo.iter().zip(hi.iter()) {
                let ext = *h - *l;
                v = v * (ext - R::of(2.0) * w).max(floor * ext);
            }
            v
        }
        ConvexBody::Ball { radius, .. } => {
            let r_in = (*radius - w).max(floor * *radius);
            unit_ball_volume::<R>(body.dim()) * r_in.powi(body.dim() as i32)
        }
        ConvexBody::Polygon2D { vertices } => {
            let mu = body.volume();
            let mut per = R::zero();
            for i in 0..vertices.len() {
                let a = vertices[i];
                let b = vertices[(i + 1) % vertices.len()];
                let dx = b[0] - a[0];
                let dy = b[1] - a[1];
                per = per + (dx * dx + dy * dy).sqrt();
            }
            // erosion of a convex region shrinks the area by at most w * perimeter
            (mu - w * per).max(floor * mu)
        }
    }
}

/// Interior covering radius `m` nodes can reach on the body eroded by `w`,
/// with a small empirical quality factor over the lattice-optimal value.
/// Planar interiors are seeded with the optimal lattice and get a tighter
/// factor than the generic greedy-plus-polish pipeline.
fn predicted_interior<R: Real>(body: &ConvexBody<R>, m: usize, w: R) -> Result<R> {
    let d = body.dim();
    let (dens, _) = dens_lookup::<R>(d)?;
    let mu_in = inset_volume(body, w);
    let ratio = dens * mu_in / (R::of_usize(m) * unit_ball_volume::<R>(d));
    let quality = if d == 2 { R::of(1.02) } else { R::of(1.06) };
    Ok(quality * ratio.powf(R::one() / R::of_usize(d)))
}

/// Triangular-lattice points of covering radius `r` clipped to the body at
/// depth `w_clip` or more. The lattice (row pitch 1.5 r, column pitch
/// sqrt(3) r, alternate rows offset half a column) is the optimal planar
/// covering, so it is the natural interior seed for two-dimensional bodies.
fn hex_points<R: Real>(body: &ConvexBody<R>, w_clip: R, r: R) -> Vec<P4<R>> {
    let (lo, hi) = body.bounding_box();
    let cx = (lo[0] + hi[0]) * R::of(0.5);
    let cy = (lo[1] + hi[1]) * R::of(0.5);
    let dy = R::of(1.5) * r;
    let dx = R::of(3.0f64.sqrt()) * r;
    let j_lo = ((lo[1] - cy) / dy).floor().as_f64() as i64 - 1;
    let j_hi = ((hi[1] - cy) / dy).ceil().as_f64() as i64 + 1;
    let w_sq = w_clip * w_clip;
    let mut out = Vec::new();
    for j in j_lo..=j_hi {
        let y = cy + R::of(j as f64) * dy;
        if y < lo[1] || y > hi[1] {
            continue;
        }
        let off = if j.rem_euclid(2) == 1 {
            R::of(0.5)
        } else {
            R::zero()
        };
        let i_lo = ((lo[0] - cx) / dx).floor().as_f64() as i64 - 1;
        let i_hi = ((hi[0] - cx) / dx).ceil().as_f64() as i64 + 1;
        for i in i_lo..=i_hi {
            let x = cx + (R::of(i as f64) + off) * dx;
            if x < lo[0] || x > hi[0] {
                continue;
            }
            let p: P4<R> = [x, y, R::zero(), R::zero()];
            if !body.contains_p4(&p) {
                continue;
            }
            let b = body.project_boundary_p4(&p);
            if dist_sq(&p, &b, 2) >= w_sq {
                out.push(p);
            }
        }
    }
    out
}

/// Largest triangular-lattice seed that fits the interior budget `m` on the
/// body whose boundary strip of depth `w` is already covered by the net.
/// Shrinking the radius grows the point count, so a bisection on the radius
/// finds the finest affordable lattice. Returns an empty seed when even the
/// coarse end of the bracket overruns the budget.
fn hex_seed<R: Real>(body: &ConvexBody<R>, m: usize, w: R) -> Result<Vec<P4<R>>> {
    let (dens, _) = dens_lookup::<R>(2)?;
    let mu_in = inset_volume(body, w);
    let r0 = (dens * mu_in / (R::of_usize(m) * unit_ball_volume::<R>(2))).sqrt();
    // keep lattice points clear of the wall, but not so deep that cells near
    // the seam lose their server
    let clip = |r: R| (w - R::of(0.6) * r).max(R::zero());
    let mut r_lo = R::of(0.55) * r0;
    let mut r_hi = R::of(2.4) * r0;
    if hex_points(body, clip(r_hi), r_hi).len() > m {
        return Ok(Vec::new());
    }
    if hex_points(body, clip(r_lo), r_lo).len() <= m {
        return Ok(hex_points(body, clip(r_lo), r_lo));
    }
    for _ in 0..48 {
        let mid = (r_lo + r_hi) * R::of(0.5);
        if hex_points(body, clip(mid), mid).len() <= m {
            r_hi = mid;
        } else {
            r_lo = mid;
        }
    }
    Ok(hex_points(body, clip(r_hi), r_hi))
}

/// Coarsen `s` until the boundary net fits the budget `cap`.
fn budgeted_spacing<R: Real>(
    body: &ConvexBody<R>,
    s0: R,
    cap: usize,
    n: usize,
) -> Result<(R, usize)> {
    let smax = body.diameter_bound() * R::of(4.0);
    let mut s = s0;
    for _ in 0..80 {
        let k = body.boundary_sample_p4(s)?.len();
        if k <= cap {
            return Ok((s, k));
        }
        if s > smax {
            break;
        }
        s = s * R::of(1.17);
    }
    Err(IsorecError::NTooSmall(format!(
        "n = {n} cannot fund a boundary net: even the coarsest one exceeds the budget"
    )))
}

/// Build the boundary net and interior web for one spacing choice and
/// polish them jointly (the net stays frozen). `ee` is the planner's
/// interior-radius estimate; it sizes the lattice seed on planar bodies.
struct Assembly<R: Real> {
    nodes: Vec<P4<R>>,
    k: usize,
    samples: Vec<P4<R>>,
    bnd_samples: Vec<P4<R>>,
}

fn assemble<R: Real>(
    body: &ConvexBody<R>,
    n: usize,
    spacing: Option<R>,
    theta: R,
    res_build: R,
    ee: R,
) -> Result<Assembly<R>> {
    let dim = body.dim();
    let z = match spacing {
        Some(s) => body.boundary_sample_p4(s)?,
        None => Vec::new(),
    };
    let k = z.len();
    let m = n - k;
    let mut res = res_build;
    let mut samples = body.interior_cover(res)?;
    for _ in 0..6 {
        if samples.len() >= 4 * m {
            break;
        }
        res = res * R::of(0.5);
        samples = body.interior_cover(res)?;
    }
    let bnd_samples = body.boundary_sample_p4(res * R::of(0.5))?;
    let seeded = match spacing {
        Some(s) if dim == 2 && m >= 8 => {
            let disp = boundary_net_factor(body) * s;
            let w = (ee * ee - disp * disp).max(R::zero()).sqrt();
            hex_seed(body, m, w)?
        }
        _ => Vec::new(),
    };
    let mut init = z.clone();
    init.extend_from_slice(&seeded);
    let first = if init.is_empty() {
        Some(deepest_sample(body, &samples))
    } else {
        None
    };
    let mut nodes = seeded;
    if nodes.len() < m {
        let x = farthest_insertion(&samples, dim, &init, first, m - nodes.len());
        nodes.extend_from_slice(&x);
    }
    nodes.extend_from_slice(&z);
    let frozen: Vec<bool> = (0..n).map(|i| i >= m).collect();
    let weight = Some(theta * R::of(0.95));
    let polished = lloyd_core(body, nodes, &frozen, &samples, &bnd_samples, 110, weight);
    Ok(Assembly {
        nodes: polished,
        k,
        samples,
        bnd_samples,
    })
}

/// Combined construction: interior approximate centers plus a boundary net
/// sized so that the boundary covering radius stays below `theta` times the
/// interior one. Both radii are certified at `resolution`; if the boundary
/// check fails, the net is densified (at the expense of interior nodes) and
/// the set rebuilt, up to three times. The report always carries exactly
/// `n` nodes and honest estimates; `boundary_condition_ok` says whether the
/// target ratio was certified.
pub fn build_xi_star<R: Real>(
    body: &ConvexBody<R>,
    n: usize,
    theta: R,
    seed: u64,
    resolution: R,
) -> Result<NodeGenReport<R>> {
    body.validate()?;
    if n == 0 {
        return Err(IsorecError::Parameter("n must be at least 1".into()));
    }
    if !(resolution > R::zero()) || !resolution.is_finite() {
        return Err(IsorecError::Parameter(
            "resolution must be positive and finite".into(),
        ));
    }
    let inv_sqrt2 = R::of(std::f64::consts::FRAC_1_SQRT_2);
    if !theta.is_finite() || !(theta > R::zero()) || !(theta < inv_sqrt2) {
        return Err(IsorecError::Parameter(
            "theta must lie strictly between 0 and 1/sqrt(2)".into(),
        ));
    }
    let dim = body.dim();
    let e0 = en_asymptotic(body, n)?;
    let cap = if n == 1 {
        0
    } else {
        (((0.65 * n as f64).floor() as usize).max(1)).min(n - 1)
    };
    let kappa = boundary_net_factor(body);
    let margin = R::of(0.95) * theta;

    // settle the budget split: spacing follows the predicted interior
    // radius, which in turn depends on how many nodes the net consumes
    let mut ee = R::of(1.08) * e0;
    let mut spacing = None;
    if cap > 0 {
        let mut s = ee * margin / kappa;
        for _ in 0..48 {
            let (s_ok, k) = budgeted_spacing(body, s, cap, n)?;
            let disp = kappa * s_ok;
            let w = (ee * ee - disp * disp).max(R::zero()).sqrt();
            let e_next = predicted_interior(body, n - k, w)?;
            let done = (e_next - ee).abs() <= R::of(1e-3) * ee;
            ee = (ee + e_next) * R::of(0.5);
            s = ee * margin / kappa;
            if done {
                break;
            }
        }
        let (s_final, _) = budgeted_spacing(body, s, cap, n)?;
        spacing = Some(s_final);
    }

    let res_build = ee / R::of(8.0);
    let weight = Some(theta * R::of(0.95));
    let mut report = None;
    for retry in 0..4 {
        let asm = assemble(body, n, spacing, theta, res_build, ee)?;
        let k = asm.k;
        let mut nodes = asm.nodes;
        let frozen: Vec<bool> = (0..n).map(|i| i >= n - k).collect();
        let mut ns = nodeset_from_p4(dim, &nodes);
        let mut e_omega = one_sided_hausdorff(body, &ns, resolution)?;
        let mut e_boundary = one_sided_hausdorff_boundary(body, &ns, resolution)?;
        // certified local search: relocate a redundant movable node onto the
        // certified argmax, re-polish briefly, and keep the move only if the
        // certified radius drops without losing the boundary margin; a round
        // where every donor candidate fails ends the search
        if k < n {
            let refine = (asm.samples.len() << dim) <= 500_000;
            let f_samples = if refine {
                body.interior_cover(res_build * R::of(0.5))?
            } else {
                asm.samples.clone()
            };
            let f_bnd = if refine {
                body.boundary_sample_p4(res_build * R::of(0.25))?
            } else {
                asm.bnd_samples.clone()
            };
            let f_all: Vec<P4<R>> = f_samples.iter().chain(f_bnd.iter()).copied().collect();
            'rounds: for _ in 0..24 {
                let mut arg = [R::zero(); 4];
                for (a, v) in e_omega.argmax.iter().enumerate() {
                    arg[a] = *v;
                }
                let donors = redundancy_order(&nodes, &frozen, dim, &f_all);
                for &donor in donors.iter().take(4) {
                    let mut trial = nodes.clone();
                    trial[donor] = arg;
                    let trial = lloyd_core(body, trial, &frozen, &f_samples, &f_bnd, 8, weight);
                    let t_ns = nodeset_from_p4(dim, &trial);
                    let t_eo = one_sided_hausdorff(body, &t_ns, resolution)?;
                    if t_eo.value + t_eo.gap >= e_omega.value + e_omega.gap {
                        continue;
                    }
                    let t_eb = one_sided_hausdorff_boundary(body, &t_ns, resolution)?;
                    let bnd_ok_now = e_boundary.value + e_boundary.gap <= theta * e_omega.value;
                    let bnd_ok_trial = t_eb.value + t_eb.gap <= theta * t_eo.value;
                    if bnd_ok_trial || !bnd_ok_now {
                        nodes = trial;
                        ns = t_ns;
                        e_omega = t_eo;
                        e_boundary = t_eb;
                        continue 'rounds;
                    }
                }
                break;
            }
        }
        let ok = e_boundary.value + e_boundary.gap <= theta * e_omega.value;
        report = Some(NodeGenReport {
            nodes: ns,
            e_omega,
            e_boundary,
            k_n: k,
            theta,
            seed,
        });
        if ok || retry == 3 {
            break;
        }
        // densify the net and rebuild, unless the budget forbids it
        match spacing {
            Some(s) => {
                let s_new = s * R::of(0.85);
                if body.boundary_sample_p4(s_new)?.len() > cap {
                    break;
                }
                spacing = Some(s_new);
            }
            None => break,
        }
    }
    Ok(report.expect("at least one build attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::one_sided_hausdorff as hausdorff;

    fn unit_square() -> ConvexBody<f64> {
        ConvexBody::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        }
    }

    fn interval() -> ConvexBody<f64> {
        ConvexBody::Box {
            lo: vec![0.0],
            hi: vec![1.0],
        }
    }

    #[test]
    fn density_table_values_and_flags() {
        let (d1, s1) = dens_lookup::<f64>(1).unwrap();
        assert_eq!(d1, 1.0);
        assert_eq!(s1, DensityStatus::Exact);

        let (d2, s2) = dens_lookup::<f64>(2).unwrap();
        assert!((d2 - 1.2091995761561452).abs() < 1e-15);
        assert_eq!(s2, DensityStatus::Exact);

        let (d3, s3) = dens_lookup::<f64>(3).unwrap();
        assert!((d3 - 1.4635030689668180).abs() < 1e-15);
        assert_eq!(s3, DensityStatus::BestKnownUpper);

        let (d4, s4) = dens_lookup::<f64>(4).unwrap();
        assert!((d4 - 1.7655285081493524).abs() < 1e-12);
        assert_eq!(s4, DensityStatus::BestKnownUpper);

        for d in [0usize, 5, 9] {
            let err = dens_lookup::<f64>(d).unwrap_err();
            assert_eq!(err.kind(), "domain");
        }
    }

    #[test]
    fn en_asymptotic_examples() {
        // unit square: (2 / (sqrt(27) n))^(1/2)
        for n in [1usize, 16, 111] {
            let e = en_asymptotic(&unit_square(), n).unwrap();
            let want = (2.0 / (27.0f64.sqrt() * n as f64)).sqrt();
            assert!((e - want).abs() <= 1e-15 * want);
        }

        // unit disc with one node: leading term sqrt(dens(2)), about 1.0996
        let disc: ConvexBody<f64> = ConvexBody::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let e1 = en_asymptotic(&disc, 1).unwrap();
        assert!((e1 - 1.0996).abs() < 1e-4);

        // homogeneity: scaling the square scales the radius
        let scaled = ConvexBody::Box {
            lo: vec![0.0, 0.0],
            hi: vec![2.5, 2.5],
        };
        let a = en_asymptotic(&scaled, 7).unwrap();
        let b = en_asymptotic(&unit_square(), 7).unwrap();
        assert!((a - 2.5 * b).abs() <= 1e-13 * a);

        assert_eq!(
            en_asymptotic(&unit_square(), 0).unwrap_err().kind(),
            "parameter"
        );
    }

    #[test]
    fn greedy_single_node_sits_at_the_center() {
        let xi = greedy_farthest_point(&unit_square(), 1, 0, 0.02).unwrap();
        assert_eq!(xi.len(), 1);
        let p = xi.point(0);
        assert!((p[0] - 0.5).hypot(p[1] - 0.5) <= 0.02);
        // witness: one node in the middle covers at radius sqrt(2)/2
        let est = hausdorff(&unit_square(), &xi, 0.01).unwrap();
        assert!(est.value <= 2.0f64.sqrt() / 2.0 + est.gap + 0.03);
    }

    #[test]
    fn greedy_interval_pair_lands_on_quarters() {
        let xi = greedy_farthest_point(&interval(), 2, 0, 0.005).unwrap();
        let mut xs: Vec<f64> = xi.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] - 0.25).abs() <= 0.02, "left node at {}", xs[0]);
        assert!((xs[1] - 0.75).abs() <= 0.02, "right node at {}", xs[1]);
        let est = hausdorff(&interval(), &xi, 0.002).unwrap();
        assert!((est.value - 0.25).abs() <= 0.02 + est.gap);
    }

    #[test]
    fn greedy_extra_node_strictly_helps() {
        let e4 = hausdorff(
            &unit_square(),
            &greedy_farthest_point(&unit_square(), 4, 11, 0.01).unwrap(),
            0.005,
        )
        .unwrap();
        let e5 = hausdorff(
            &unit_square(),
            &greedy_farthest_point(&unit_square(), 5, 11, 0.01).unwrap(),
            0.005,
        )
        .unwrap();
        assert!(e5.value + e5.gap < e4.value);
    }

    #[test]
    fn greedy_output_respects_volume_lower_bound() {
        // n balls of the covering radius must cover the body
        for n in [3usize, 9, 20] {
            let xi = greedy_farthest_point(&unit_square(), n, 0, 0.01).unwrap();
            let est = hausdorff(&unit_square(), &xi, 0.005).unwrap();
            let floor = (1.0 / (std::f64::consts::PI * n as f64)).sqrt();
            assert!(
                est.value + est.gap >= floor * 0.98,
                "n={n}: {} below volume floor {}",
                est.value,
                floor
            );
        }
    }

    #[test]
    fn greedy_rejects_too_coarse_sampling() {
        let err = greedy_farthest_point(&unit_square(), 4000, 0, 0.25).unwrap_err();
        assert_eq!(err.kind(), "parameter");
    }

    #[test]
    fn lloyd_is_a_fixed_point_at_the_center() {
        let mut xi = NodeSet::new(2).unwrap();
        xi.push(&[0.5, 0.5]);
        let out = lloyd_refine(&unit_square(), &xi, 10, 0.01).unwrap();
        let p = out.point(0);
        assert!((p[0] - 0.5).abs() < 1e-3 && (p[1] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn lloyd_never_degrades_the_covering_radius() {
        let xi = NodeSet::from_points(
            2,
            vec![
                vec![0.05, 0.05],
                vec![0.1, 0.9],
                vec![0.2, 0.4],
                vec![0.95, 0.2],
            ],
        )
        .unwrap();
        let before = hausdorff(&unit_square(), &xi, 0.004).unwrap();
        let out = lloyd_refine(&unit_square(), &xi, 50, 0.01).unwrap();
        let after = hausdorff(&unit_square(), &out, 0.004).unwrap();
        assert!(after.value <= before.value + before.gap + after.gap);
        // four nodes spread over the square do clearly better than this start
        assert!(after.value < 0.9 * before.value);
    }

    #[test]
    fn lloyd_interval_pair_converges_to_quarters() {
        let xi = NodeSet::from_points(1, vec![vec![0.1], vec![0.9]]).unwrap();
        let out = lloyd_refine(&interval(), &xi, 80, 0.002).unwrap();
        let mut xs: Vec<f64> = out.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] - 0.25).abs() <= 0.02);
        assert!((xs[1] - 0.75).abs() <= 0.02);
    }

    #[test]
    fn lloyd_rejects_bad_arguments() {
        let empty = NodeSet::new(2).unwrap();
        assert_eq!(
            lloyd_refine(&unit_square(), &empty, 5, 0.01)
                .unwrap_err()
                .kind(),
            "parameter"
        );
        let xi = NodeSet::from_points(1, vec![vec![0.5]]).unwrap();
        assert_eq!(
            lloyd_refine(&unit_square(), &xi, 5, 0.01).unwrap_err().kind(),
            "domain"
        );
    }

    #[test]
    fn separated_set_greedy_examples() {
        let cands = NodeSet::from_points(1, vec![vec![0.0], vec![0.4], vec![0.8], vec![1.2]])
            .unwrap();
        let out = maximal_separated_set(&cands, 0.5).unwrap();
        let xs: Vec<f64> = out.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.8]);

        // all candidates within epsilon of each other: one survivor
        let close = NodeSet::from_points(2, vec![vec![0.0, 0.0], vec![0.01, 0.0], vec![0.0, 0.02]])
            .unwrap();
        let one = maximal_separated_set(&close, 0.5).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.point(0), &[0.0, 0.0]);

        let empty = NodeSet::new(3).unwrap();
        let out = maximal_separated_set(&empty, 0.1).unwrap();
        assert!(out.is_empty());
        assert_eq!(out.dim(), 3);

        assert_eq!(
            maximal_separated_set(&cands, 0.0).unwrap_err().kind(),
            "parameter"
        );
    }

    #[test]
    fn separated_set_postconditions_on_a_cloud() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let pts: Vec<Vec<f64>> = (0..400)
            .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let cands = NodeSet::from_points(2, pts.clone()).unwrap();
        let eps = 0.13;
        let out = maximal_separated_set(&cands, eps).unwrap();
        for i in 0..out.len() {
            for j in 0..i {
                let a = out.point(i);
                let b = out.point(j);
                let d = (a[0] - b[0]).hypot(a[1] - b[1]);
                assert!(d > eps, "accepted pair at distance {d}");
            }
        }
        for p in &pts {
            let mut dmin = f64::INFINITY;
            for i in 0..out.len() {
                let q = out.point(i);
                dmin = dmin.min((p[0] - q[0]).hypot(p[1] - q[1]));
            }
            assert!(dmin <= eps, "candidate {p:?} at distance {dmin}");
        }
    }

    #[test]
    fn xi_star_square_certifies_the_boundary_condition() {
        let rep = build_xi_star(&unit_square(), 100, 0.5, 7, 0.004).unwrap();
        assert_eq!(rep.nodes.len(), 100);
        assert!(rep.k_n < 100);
        assert!(rep.k_n > 0);
        assert!(
            rep.boundary_condition_ok(),
            "e_bnd {} + {} vs theta*e_omega {}",
            rep.e_boundary.value,
            rep.e_boundary.gap,
            0.5 * rep.e_omega.value
        );
        // covering volume floor
        let floor = (1.0 / (std::f64::consts::PI * 100.0)).sqrt();
        assert!(rep.e_omega.value + rep.e_omega.gap >= 0.98 * floor);
    }

    #[test]
    fn xi_star_is_deterministic() {
        let a = build_xi_star(&unit_square(), 60, 0.5, 3, 0.006).unwrap();
        let b = build_xi_star(&unit_square(), 60, 0.5, 3, 0.006).unwrap();
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn xi_star_boundary_share_decays() {
        let mut shares = Vec::new();
        for n in [100usize, 400, 1600] {
            let res = 0.1 * en_asymptotic(&unit_square(), n).unwrap();
            let rep = build_xi_star(&unit_square(), n, 0.5, 0, res).unwrap();
            assert_eq!(rep.nodes.len(), n);
            shares.push(rep.k_n as f64 / n as f64);
        }
        assert!(
            shares[0] > shares[1] && shares[1] > shares[2],
            "boundary share not decreasing: {shares:?}"
        );
    }

    #[test]
    fn xi_star_rejects_bad_parameters() {
        assert_eq!(
            build_xi_star(&unit_square(), 100, 0.8, 0, 0.01)
                .unwrap_err()
                .kind(),
            "parameter"
        );
        assert_eq!(
            build_xi_star(&unit_square(), 100, 0.0, 0, 0.01)
                .unwrap_err()
                .kind(),
            "parameter"
        );
        assert_eq!(
            build_xi_star(&unit_square(), 0, 0.5, 0, 0.01)
                .unwrap_err()
                .kind(),
            "parameter"
        );
        // far too few nodes to fund even the corner net
        assert_eq!(
            build_xi_star(&unit_square(), 4, 0.5, 0, 0.05)
                .unwrap_err()
                .kind(),
            "n_too_small"
        );
    }

    #[test]
    fn xi_star_on_a_disc() {
        let disc: ConvexBody<f64> = ConvexBody::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let rep = build_xi_star(&disc, 80, 0.5, 0, 0.01).unwrap();
        assert_eq!(rep.nodes.len(), 80);
        assert!(rep.boundary_condition_ok());
    }
}
