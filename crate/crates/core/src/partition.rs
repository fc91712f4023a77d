//! Non-overlapping subdomain partitions and their graph-distance expansion
//! into overlapping subdomains.
//!
//! Two partitioners are provided: a greedy graph-growing algorithm with
//! Kernighan-Lin style boundary refinement (works on any symmetric sparsity
//! pattern), and recursive inertial bisection for problems with nodal
//! coordinates. Both are deterministic for a fixed seed.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::{symmetric_eigen, DenseMatrix};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const UNASSIGNED: usize = usize::MAX;

/// Node-to-subdomain assignment. Every node has exactly one part id in
/// `[0, num_parts)` and every part is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_parts: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, num_parts: usize) -> Result<Self> {
        if num_parts == 0 {
            return Err(Error::InvalidPartition("num_parts must be >= 1".into()));
        }
        let mut seen = vec![false; num_parts];
        for (i, &p) in assignment.iter().enumerate() {
            if p >= num_parts {
                return Err(Error::InvalidPartition(format!(
                    "node {i} has part id {p} >= num_parts {num_parts}"
                )));
            }
            seen[p] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("part {empty} is empty")));
        }
        Ok(Partition {
            assignment,
            num_parts,
        })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    #[inline]
    pub fn part_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Node lists per part, each sorted ascending.
    pub fn parts(&self) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); self.num_parts];
        for (i, &p) in self.assignment.iter().enumerate() {
            parts[p].push(i);
        }
        parts
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_parts];
        for &p in &self.assignment {
            sizes[p] += 1;
        }
        sizes
    }

    /// Replicate a node-level partition onto interleaved vector unknowns
    /// (node-major ordering, `num_components` rows per node).
    pub fn expand_to_components(&self, num_components: usize) -> Partition {
        let mut assignment = Vec::with_capacity(self.assignment.len() * num_components);
        for &p in &self.assignment {
            for _ in 0..num_components {
                assignment.push(p);
            }
        }
        Partition {
            assignment,
            num_parts: self.num_parts,
        }
    }
}

/// Overlapping subdomains: part `i` expanded by `delta_graph` layers of
/// graph neighbors. Each subdomain list is sorted.
#[derive(Debug, Clone)]
pub struct OverlapSet {
    pub subdomains: Vec<Vec<usize>>,
    pub delta_graph: usize,
}

fn require_symmetric_square(a: &CsrMatrix, op: &'static str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim(op, format!("matrix is {}x{}", a.nrows(), a.ncols())));
    }
    if !a.is_symmetric_flagged() {
        return Err(Error::InvalidArgument(format!(
            "{op} requires a symmetric matrix"
        )));
    }
    Ok(())
}

/// Greedy graph-growing partition with boundary refinement.
///
/// Seeds are chosen farthest-first (the first from a seeded pseudo-peripheral
/// search) and all parts grow simultaneously by breadth-first search to a
/// shared size cap, which keeps parts compact. Two recentering rounds move
/// each seed to the innermost node of its part and regrow; up to ten
/// Kernighan-Lin style passes then move boundary nodes to reduce the edge
/// cut while keeping parts connected and balanced.
pub fn graph_partition(a: &CsrMatrix, num_parts: usize, seed: u64) -> Result<Partition> {
    require_symmetric_square(a, "graph_partition")?;
    let n = a.nrows();
    if num_parts == 0 {
        return Err(Error::InvalidArgument("num_parts must be >= 1".into()));
    }
    if num_parts > n {
        return Err(Error::InvalidArgument(format!(
            "num_parts {num_parts} exceeds the number of nodes {n}"
        )));
    }
    if num_parts == 1 {
        return Partition::new(vec![0; n], 1);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.random_range(0..n);
    let first_seed = bfs_farthest(a, bfs_farthest(a, start));
    let seeds = farthest_point_seeds(a, first_seed, num_parts, seed);

    let mut assignment = vec![UNASSIGNED; n];
    grow_simultaneously(a, &seeds, &mut assignment);
    attach_leftovers(a, &mut assignment, num_parts);

    for _ in 0..2 {
        let centers = part_centers(a, &assignment, num_parts);
        assignment.fill(UNASSIGNED);
        grow_simultaneously(a, &centers, &mut assignment);
        attach_leftovers(a, &mut assignment, num_parts);
    }
    let cap = balance_cap(n, num_parts);
    rebalance(a, &mut assignment, num_parts, cap);
    refine_boundary(a, &mut assignment, num_parts, 10);

    Partition::new(assignment, num_parts)
}

/// Largest allowed part size: within the 1.3x balance contract, but never
/// below the pigeonhole minimum.
fn balance_cap(n: usize, num_parts: usize) -> usize {
    let ideal = n as f64 / num_parts as f64;
    ((1.25 * ideal).floor() as usize).max(n.div_ceil(num_parts))
}

/// Move boundary nodes out of oversized parts into strictly smaller adjacent
/// parts (diffusive: the sum of squared sizes decreases with every move, so
/// this terminates) until every part fits under `cap` or no admissible move
/// remains.
fn rebalance(a: &CsrMatrix, assignment: &mut [usize], num_parts: usize, cap: usize) {
    let n = assignment.len();
    let mut sizes = vec![0usize; num_parts];
    for &p in assignment.iter() {
        sizes[p] += 1;
    }
    let mut stamp = vec![usize::MAX; n];
    let mut stamp_gen = 0usize;
    // min_gain 0 moves keep the boundary smooth; a -infinity tier unsticks
    // the remaining excess when no cut-neutral move exists
    for min_gain in [0i64, i64::MIN] {
        loop {
            if sizes.iter().all(|&s| s <= cap) {
                return;
            }
            let mut progress = false;
            for v in 0..n {
                let pv = assignment[v];
                if sizes[pv] <= cap {
                    continue;
                }
                // most-connected adjacent part that is smaller by at least
                // two, ties toward the smaller part then the lower id
                let mut own = 0i64;
                let mut counts: Vec<(usize, i64)> = Vec::new();
                for &u in a.row(v).0 {
                    if u == v {
                        continue;
                    }
                    let pu = assignment[u];
                    if pu == pv {
                        own += 1;
                        continue;
                    }
                    if sizes[pu] + 1 >= sizes[pv] {
                        continue;
                    }
                    if let Some(c) = counts.iter_mut().find(|(p, _)| *p == pu) {
                        c.1 += 1;
                    } else {
                        counts.push((pu, 1));
                    }
                }
                let mut best: Option<(i64, usize)> = None;
                for &(p, c) in &counts {
                    let better = match best {
                        None => true,
                        Some((bc, bp)) => {
                            c > bc || (c == bc && (sizes[p], p) < (sizes[bp], bp))
                        }
                    };
                    if better {
                        best = Some((c, p));
                    }
                }
                let (edges, target) = match best {
                    Some(b) => b,
                    None => continue,
                };
                if edges - own < min_gain {
                    continue;
                }
                if disconnects(a, assignment, v, pv, sizes[pv], &mut stamp, &mut stamp_gen) {
                    continue;
                }
                assignment[v] = target;
                sizes[pv] -= 1;
                sizes[target] += 1;
                progress = true;
            }
            if !progress {
                break;
            }
        }
    }
}

/// Farthest-point sampling over graph distance, starting from `first`.
/// Plateaus of equal distance are broken by a seeded hash so seeds do not
/// cluster along the node numbering.
fn farthest_point_seeds(a: &CsrMatrix, first: usize, num_parts: usize, salt: u64) -> Vec<usize> {
    let n = a.nrows();
    let mut dist = vec![usize::MAX; n];
    let mut heap: BinaryHeap<(usize, u64, usize)> = BinaryHeap::new();
    let mut is_seed = vec![false; n];
    let mut seeds = Vec::with_capacity(num_parts);
    let mut queue = VecDeque::new();
    let mut relax_from = |s: usize,
                          dist: &mut Vec<usize>,
                          heap: &mut BinaryHeap<(usize, u64, usize)>| {
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            for &v in a.row(u).0 {
                if v != u && dist[v] > du + 1 {
                    dist[v] = du + 1;
                    heap.push((dist[v], splitmix64(v as u64 ^ salt), v));
                    queue.push_back(v);
                }
            }
        }
    };
    seeds.push(first);
    is_seed[first] = true;
    relax_from(first, &mut dist, &mut heap);
    while seeds.len() < num_parts {
        let next = loop {
            match heap.pop() {
                Some((d, _, v)) => {
                    if !is_seed[v] && dist[v] == d {
                        break Some(v);
                    }
                }
                None => break None,
            }
        };
        let next = match next {
            Some(v) => v,
            // disconnected remainder: take the first node not yet reached
            None => match (0..n).find(|&v| dist[v] == usize::MAX && !is_seed[v]) {
                Some(v) => v,
                None => break,
            },
        };
        seeds.push(next);
        is_seed[next] = true;
        relax_from(next, &mut dist, &mut heap);
    }
    seeds
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Multi-source BFS growth: every part claims its wavefront simultaneously,
/// so each node joins the part whose seed is nearest in graph distance.
/// Each part stays connected because it only grows across its own frontier.
fn grow_simultaneously(a: &CsrMatrix, seeds: &[usize], assignment: &mut [usize]) {
    let mut queue = VecDeque::with_capacity(assignment.len());
    for (p, &s) in seeds.iter().enumerate() {
        debug_assert_eq!(assignment[s], UNASSIGNED);
        assignment[s] = p;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        let p = assignment[u];
        for &v in a.row(u).0 {
            if v != u && assignment[v] == UNASSIGNED {
                assignment[v] = p;
                queue.push_back(v);
            }
        }
    }
}

/// Innermost node of each part: the last node reached by a BFS from the
/// part's boundary, restricted to the part.
fn part_centers(a: &CsrMatrix, assignment: &[usize], num_parts: usize) -> Vec<usize> {
    let n = assignment.len();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut centers: Vec<usize> = vec![usize::MAX; num_parts];
    for u in 0..n {
        let boundary = a
            .row(u)
            .0
            .iter()
            .any(|&v| v != u && assignment[v] != assignment[u]);
        if boundary {
            dist[u] = 0;
            queue.push_back(u);
            centers[assignment[u]] = u;
        }
    }
    // interior-only parts (no boundary at all) fall back to their first node
    for u in 0..n {
        if centers[assignment[u]] == usize::MAX {
            centers[assignment[u]] = u;
        }
    }
    while let Some(u) = queue.pop_front() {
        let p = assignment[u];
        for &v in a.row(u).0 {
            if v != u && assignment[v] == p && dist[v] > dist[u] + 1 {
                dist[v] = dist[u] + 1;
                centers[p] = v;
                queue.push_back(v);
            }
        }
    }
    centers
}

/// Assign any still-unassigned connected component to an adjacent part
/// (smallest first), falling back to the globally smallest part.
fn attach_leftovers(a: &CsrMatrix, assignment: &mut [usize], num_parts: usize) {
    let n = assignment.len();
    let mut sizes = vec![0usize; num_parts];
    for &p in assignment.iter() {
        if p != UNASSIGNED {
            sizes[p] += 1;
        }
    }
    let mut comp = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if assignment[s] != UNASSIGNED {
            continue;
        }
        comp.clear();
        queue.clear();
        // temporarily mark with a sentinel one past the last part id
        assignment[s] = num_parts;
        comp.push(s);
        queue.push_back(s);
        let mut best: Option<(usize, usize)> = None; // (size, part)
        while let Some(u) = queue.pop_front() {
            for &v in a.row(u).0 {
                if v == u {
                    continue;
                }
                match assignment[v] {
                    UNASSIGNED => {
                        assignment[v] = num_parts;
                        comp.push(v);
                        queue.push_back(v);
                    }
                    p if p < num_parts => {
                        let cand = (sizes[p], p);
                        if best.map_or(true, |b| cand < b) {
                            best = Some(cand);
                        }
                    }
                    _ => {}
                }
            }
        }
        let part = best.map(|(_, p)| p).unwrap_or_else(|| {
            (0..num_parts).min_by_key(|&p| (sizes[p], p)).unwrap()
        });
        for &v in &comp {
            assignment[v] = part;
        }
        sizes[part] += comp.len();
    }
}

/// Kernighan-Lin style boundary refinement: move a node to an adjacent part
/// when that strictly reduces the edge cut, keeps both parts' sizes within
/// bounds and does not disconnect the source part.
fn refine_boundary(a: &CsrMatrix, assignment: &mut [usize], num_parts: usize, max_passes: usize) {
    let n = assignment.len();
    let ideal = n as f64 / num_parts as f64;
    let cap = ((1.29 * ideal).floor() as usize).max(1);
    let mut sizes = vec![0usize; num_parts];
    for &p in assignment.iter() {
        sizes[p] += 1;
    }
    let mut stamp = vec![usize::MAX; n];
    let mut stamp_gen = 0usize;
    let mut gains: Vec<(usize, i64)> = Vec::new();

    for _pass in 0..max_passes {
        let mut moved = 0usize;
        for v in 0..n {
            let pv = assignment[v];
            if sizes[pv] <= 1 {
                continue;
            }
            gains.clear();
            let mut own_edges = 0i64;
            for &u in a.row(v).0 {
                if u == v {
                    continue;
                }
                let pu = assignment[u];
                if pu == pv {
                    own_edges += 1;
                } else if let Some(g) = gains.iter_mut().find(|(p, _)| *p == pu) {
                    g.1 += 1;
                } else {
                    gains.push((pu, 1));
                }
            }
            if gains.is_empty() {
                continue;
            }
            gains.sort_unstable_by_key(|&(p, c)| (Reverse(c), p));
            let (target, count) = gains[0];
            let gain = count - own_edges;
            if gain <= 0 || sizes[target] + 1 > cap {
                continue;
            }
            if disconnects(a, assignment, v, pv, sizes[pv], &mut stamp, &mut stamp_gen) {
                continue;
            }
            assignment[v] = target;
            sizes[pv] -= 1;
            sizes[target] += 1;
            moved += 1;
        }
        if moved == 0 {
            break;
        }
    }
}

/// Would removing `v` disconnect part `pv`? BFS inside the part from one of
/// v's same-part neighbors, skipping `v`.
fn disconnects(
    a: &CsrMatrix,
    assignment: &[usize],
    v: usize,
    pv: usize,
    part_size: usize,
    stamp: &mut [usize],
    stamp_gen: &mut usize,
) -> bool {
    let start = a
        .row(v)
        .0
        .iter()
        .copied()
        .find(|&u| u != v && assignment[u] == pv);
    let start = match start {
        Some(s) => s,
        None => return false, // isolated in its part: removal cannot disconnect
    };
    *stamp_gen += 1;
    let gen = *stamp_gen;
    let mut reached = 1usize;
    let mut queue = VecDeque::new();
    stamp[start] = gen;
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        for &w in a.row(u).0 {
            if w != u && w != v && assignment[w] == pv && stamp[w] != gen {
                stamp[w] = gen;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    reached != part_size - 1
}

fn bfs_farthest(a: &CsrMatrix, start: usize) -> usize {
    let n = a.nrows();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[start] = 0;
    queue.push_back(start);
    let mut far = start;
    while let Some(u) = queue.pop_front() {
        for &v in a.row(u).0 {
            if v != u && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                if dist[v] > dist[far] || (dist[v] == dist[far] && v < far) {
                    far = v;
                }
                queue.push_back(v);
            }
        }
    }
    far
}

/// Recursive inertial bisection of point coordinates.
///
/// Each level splits at the median of the projection onto the principal
/// inertia axis; `randomize_first_cut` replaces the first axis with a seeded
/// random direction. `num_parts` must be a power of two.
pub fn inertial_partition(
    coords: &[f64],
    dim: usize,
    num_parts: usize,
    seed: u64,
    randomize_first_cut: bool,
) -> Result<Partition> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "inertial_partition supports dim 1..=3, got {dim}"
        )));
    }
    if coords.len() % dim != 0 {
        return Err(Error::InvalidArgument(format!(
            "coords length {} is not a multiple of dim {dim}",
            coords.len()
        )));
    }
    let n = coords.len() / dim;
    if num_parts == 0 || !num_parts.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "inertial_partition requires a power-of-two part count, got {num_parts}; \
             use graph_partition for arbitrary counts"
        )));
    }
    if num_parts > n {
        return Err(Error::InvalidArgument(format!(
            "num_parts {num_parts} exceeds the number of nodes {n}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    let mut indices: Vec<usize> = (0..n).collect();
    // work list of (slice range, first part id, parts in subtree, depth)
    let mut work: Vec<(usize, usize, usize, usize, usize)> = vec![(0, n, 0, num_parts, 0)];
    while let Some((lo, hi, base, parts, depth)) = work.pop() {
        if parts == 1 {
            for &i in &indices[lo..hi] {
                assignment[i] = base;
            }
            continue;
        }
        let slice = &mut indices[lo..hi];
        let direction = if depth == 0 && randomize_first_cut {
            random_unit_direction(dim, &mut rng)
        } else {
            principal_axis(coords, dim, slice)?
        };
        slice.sort_by(|&i, &j| {
            let pi = project(coords, dim, i, &direction);
            let pj = project(coords, dim, j, &direction);
            pi.partial_cmp(&pj).unwrap().then(i.cmp(&j))
        });
        let half = slice.len() / 2;
        work.push((lo, lo + half, base, parts / 2, depth + 1));
        work.push((lo + half, hi, base + parts / 2, parts / 2, depth + 1));
    }
    Partition::new(assignment, num_parts)
}

#[inline]
fn project(coords: &[f64], dim: usize, node: usize, direction: &[f64]) -> f64 {
    (0..dim).map(|k| coords[node * dim + k] * direction[k]).sum()
}

fn random_unit_direction(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Principal inertia axis of the selected points, sign-canonicalized so the
/// first component of significant magnitude is positive.
fn principal_axis(coords: &[f64], dim: usize, nodes: &[usize]) -> Result<Vec<f64>> {
    let m = nodes.len() as f64;
    let mut mean = vec![0.0f64; dim];
    for &i in nodes {
        for k in 0..dim {
            mean[k] += coords[i * dim + k];
        }
    }
    for mk in mean.iter_mut() {
        *mk /= m;
    }
    let mut cov = DenseMatrix::zeros(dim, dim);
    for &i in nodes {
        for r in 0..dim {
            let xr = coords[i * dim + r] - mean[r];
            for c in r..dim {
                let xc = coords[i * dim + c] - mean[c];
                let v = cov.get(r, c) + xr * xc;
                cov.set(r, c, v);
                if c != r {
                    cov.set(c, r, v);
                }
            }
        }
    }
    let (_vals, vecs) = symmetric_eigen(&cov)?;
    let mut axis: Vec<f64> = (0..dim).map(|k| vecs.get(k, dim - 1)).collect();
    if let Some(lead) = axis.iter().find(|x| x.abs() > 1e-12) {
        if *lead < 0.0 {
            for x in axis.iter_mut() {
                *x = -*x;
            }
        }
    }
    Ok(axis)
}

/// Expand each part by `delta_graph` layers of graph distance in the
/// adjacency of `a`'s nonzero off-diagonal pattern.
pub fn expand_overlap(a: &CsrMatrix, part: &Partition, delta_graph: usize) -> OverlapSet {
    let n = a.nrows();
    debug_assert_eq!(n, part.len());
    let parts = part.parts();
    let mut stamp = vec![usize::MAX; n];
    let mut subdomains = Vec::with_capacity(parts.len());
    for (pi, nodes) in parts.iter().enumerate() {
        let mut members = nodes.clone();
        for &v in nodes {
            stamp[v] = pi;
        }
        let mut frontier = nodes.clone();
        for _ in 0..delta_graph {
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in a.row(u).0 {
                    if v != u && stamp[v] != pi {
                        stamp[v] = pi;
                        next.push(v);
                        members.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        members.sort_unstable();
        subdomains.push(members);
    }
    OverlapSet {
        subdomains,
        delta_graph,
    }
}

/// Boolean coupling pattern between parts: (I, J) is nonzero iff some edge
/// of `a` connects part I to part J, or I == J.
pub fn subdomain_adjacency(part: &Partition, a: &CsrMatrix) -> Result<CsrMatrix> {
    require_symmetric_square(a, "subdomain_adjacency")?;
    if a.nrows() != part.len() {
        return Err(Error::dim(
            "subdomain_adjacency",
            format!("matrix has {} rows, partition {}", a.nrows(), part.len()),
        ));
    }
    let k = part.num_parts();
    let mut pairs = std::collections::BTreeSet::new();
    for p in 0..k {
        pairs.insert((p, p));
    }
    for i in 0..a.nrows() {
        let pi = part.part_of(i);
        for &j in a.row(i).0 {
            if j != i {
                let pj = part.part_of(j);
                pairs.insert((pi, pj));
                pairs.insert((pj, pi));
            }
        }
    }
    let triplets: Vec<(usize, usize, f64)> =
        pairs.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
    CsrMatrix::from_triplets(k, k, &triplets)?.into_symmetric()
}

/// Collapse the sparsity pattern of an interleaved vector-valued operator to
/// its node graph (an edge wherever any component pair couples two nodes).
pub fn node_graph(a: &CsrMatrix, num_components: usize) -> Result<CsrMatrix> {
    require_symmetric_square(a, "node_graph")?;
    if a.nrows() % num_components != 0 {
        return Err(Error::dim(
            "node_graph",
            format!(
                "matrix dimension {} is not a multiple of num_components {num_components}",
                a.nrows()
            ),
        ));
    }
    let n_nodes = a.nrows() / num_components;
    let mut pairs = std::collections::BTreeSet::new();
    for i in 0..a.nrows() {
        let ni = i / num_components;
        pairs.insert((ni, ni));
        for &j in a.row(i).0 {
            let nj = j / num_components;
            pairs.insert((ni, nj));
            pairs.insert((nj, ni));
        }
    }
    let triplets: Vec<(usize, usize, f64)> =
        pairs.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
    CsrMatrix::from_triplets(n_nodes, n_nodes, &triplets)?.into_symmetric()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
            .unwrap()
            .into_symmetric()
            .unwrap()
    }

    #[test]
    fn single_part_partition() {
        let a = path_graph(10);
        let p = graph_partition(&a, 1, 0).unwrap();
        assert!(p.assignment().iter().all(|&x| x == 0));
    }

    #[test]
    fn rejects_more_parts_than_nodes() {
        let a = path_graph(4);
        assert!(graph_partition(&a, 5, 0).is_err());
    }

    #[test]
    fn path_graph_two_parts_contiguous() {
        let a = path_graph(10);
        let p = graph_partition(&a, 2, 7).unwrap();
        let sizes = p.part_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 10);
        assert!(*sizes.iter().max().unwrap() <= 5 + 1);
        // contiguous runs: assignment changes at most once along the path
        let changes = p
            .assignment()
            .windows(2)
            .filter(|w| w[0] != w[1])
            .count();
        assert_eq!(changes, 1, "assignment {:?}", p.assignment());
    }

    #[test]
    fn partition_is_deterministic() {
        let a = path_graph(40);
        let p1 = graph_partition(&a, 4, 42).unwrap();
        let p2 = graph_partition(&a, 4, 42).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn inertial_collinear_median_split() {
        let coords = vec![0.0, 1.0, 2.0, 3.0];
        let p = inertial_partition(&coords, 1, 2, 0, false).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1, 1]);
    }

    #[test]
    fn inertial_rejects_non_power_of_two() {
        let coords = vec![0.0, 1.0, 2.0];
        let err = inertial_partition(&coords, 1, 3, 0, false).unwrap_err();
        assert!(err.to_string().contains("graph_partition"));
    }

    #[test]
    fn inertial_random_first_cut_deterministic() {
        let coords: Vec<f64> = (0..32).flat_map(|i| vec![(i % 8) as f64, (i / 8) as f64]).collect();
        let p1 = inertial_partition(&coords, 2, 4, 9, true).unwrap();
        let p2 = inertial_partition(&coords, 2, 4, 9, true).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn overlap_zero_is_partition() {
        let a = path_graph(9);
        let assignment = vec![0, 0, 0, 0, 1, 1, 1, 1, 1];
        let part = Partition::new(assignment, 2).unwrap();
        let ov = expand_overlap(&a, &part, 0);
        assert_eq!(ov.subdomains[0], vec![0, 1, 2, 3]);
        assert_eq!(ov.subdomains[1], vec![4, 5, 6, 7, 8]);
    }

    #[test]
    fn overlap_one_ring_on_path() {
        let a = path_graph(9);
        let assignment = vec![0, 0, 0, 0, 1, 1, 1, 1, 1];
        let part = Partition::new(assignment, 2).unwrap();
        let ov = expand_overlap(&a, &part, 1);
        assert_eq!(ov.subdomains[0], vec![0, 1, 2, 3, 4]);
        assert_eq!(ov.subdomains[1], vec![3, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn adjacency_of_path_parts_is_tridiagonal() {
        let a = path_graph(9);
        let assignment = vec![0, 0, 0, 1, 1, 1, 2, 2, 2];
        let part = Partition::new(assignment, 3).unwrap();
        let adj = subdomain_adjacency(&part, &a).unwrap();
        assert_eq!(adj.nrows(), 3);
        assert_eq!(adj.get(0, 1), 1.0);
        assert_eq!(adj.get(1, 2), 1.0);
        assert_eq!(adj.get(0, 2), 0.0);
        assert_eq!(adj.get(2, 2), 1.0);
    }

    #[test]
    fn single_part_adjacency() {
        let a = path_graph(3);
        let part = Partition::new(vec![0, 0, 0], 1).unwrap();
        let adj = subdomain_adjacency(&part, &a).unwrap();
        assert_eq!(adj.nrows(), 1);
        assert_eq!(adj.get(0, 0), 1.0);
    }

    #[test]
    fn component_expansion_replicates_ids() {
        let part = Partition::new(vec![0, 1, 1], 2).unwrap();
        let e = part.expand_to_components(2);
        assert_eq!(e.assignment(), &[0, 0, 1, 1, 1, 1]);
    }
}
