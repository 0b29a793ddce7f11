//! Hard-decision decoder that pairs anyons by growing a search distance.
//!
//! The decoder walks a search distance `k = 1, 2, ...`. At each level it
//! sweeps the anyons in node order (row-major, with the left and right
//! boundary nodes after all anyons); an anyon whose nearest partner —
//! another live anyon or a boundary — sits within distance `k` is
//! annihilated with that partner immediately: the minimum-weight chain
//! joining the two is XORed into the correction and the pair leaves the
//! game (a boundary absorbs an anyon without being consumed). Ties in
//! the partner choice go to the smallest node index, so anyons beat the
//! left boundary, which beats the right. Sweeps repeat at the same `k`
//! until one makes no annihilation, and only then does `k` grow, so
//! close pairs are always consumed before distant ones.
//!
//! The two metrics differ in what "distance" means while the game runs:
//!
//! * [`Metric::Standard`] — distances stay the initial node distances.
//! * [`Metric::Shortcut`] — after each annihilation of a pair `(c, d)`
//!   every other node pair's distance contracts through the freshly
//!   connected pair: `D(a,b) <- min(D(a,b), D(a,c)+D(d,b),
//!   D(a,d)+D(c,b))`. Two anyons far apart on the lattice but close to
//!   the two ends of an already-corrected chain are then cheap to join,
//!   which is exactly what defeats the hierarchical cluster patterns in
//!   [`crate::noise`]. Each contraction records the pair it went
//!   through (a *witness*) so the final correction can be expanded back
//!   into physical qubit flips.
//!
//! [`decode`] implements both metrics over one engine backed by a
//! [`DistanceTable`]. [`decode_ring_scan`] is an independent,
//! table-free implementation of the standard metric that probes
//! concentric rings on the plaquette grid; it must reproduce the
//! engine's pairings exactly and serves as a cross-check and as a
//! low-memory path for very large lattices.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    geodesic_qubits, node_distance, CodeGeometry, ErrorPattern, Node, Syndrome,
    INFINITE_DISTANCE,
};
use crate::{Error, Result};

/// Distance rule the decoder plays by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Distances never change during decoding.
    #[default]
    Standard,
    /// Distances contract through annihilated pairs.
    Shortcut,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Standard => write!(f, "standard"),
            Metric::Shortcut => write!(f, "shortcut"),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "standard" => Ok(Metric::Standard),
            "shortcut" => Ok(Metric::Shortcut),
            other => Err(format!("unknown decoder variant {other:?} (expected \"standard\" or \"shortcut\")")),
        }
    }
}

/// Decoder settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Which distance rule to use.
    pub metric: Metric,
    /// Whether to count examined candidate pairs (cheap; on by default).
    pub count_ops: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            metric: Metric::Standard,
            count_ops: true,
        }
    }
}

impl DecoderConfig {
    /// Standard-metric configuration.
    pub fn standard() -> Self {
        DecoderConfig::default()
    }

    /// Shortcut-metric configuration.
    pub fn shortcut() -> Self {
        DecoderConfig {
            metric: Metric::Shortcut,
            count_ops: true,
        }
    }

    /// Configuration with the given metric.
    pub fn with_metric(metric: Metric) -> Self {
        DecoderConfig {
            metric,
            count_ops: true,
        }
    }
}

/// One annihilation event: `a` was paired with `b` at search distance `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    /// The anyon that initiated the pairing (sweep order).
    pub a: Node,
    /// Its partner: a live anyon or a boundary node.
    pub b: Node,
    /// Search distance at which the pair was annihilated.
    pub k: usize,
}

/// Everything a decoding round produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// Physical correction; XOR with the error to obtain the residual.
    pub correction: ErrorPattern,
    /// Annihilations in the order they happened.
    pub pairings: Vec<Pairing>,
    /// Largest search distance at which a pair was annihilated.
    pub k_max: usize,
    /// Candidate pairs examined while searching for partners, if
    /// counting was enabled (zero otherwise). The ring-scan variant
    /// counts ring cells probed instead.
    pub examined_pairs: u64,
    /// Number of anyons absorbed by the left boundary.
    pub left_pairings: usize,
    /// Number of anyons absorbed by the right boundary.
    pub right_pairings: usize,
}

/// Symmetric node-to-node distance table for one decoding round.
///
/// Nodes are the syndrome's anyons in row-major order followed by
/// [`Node::Left`] and [`Node::Right`]. The table keeps a distance for
/// every unordered node pair (including pairs whose anyons have already
/// been annihilated — later contractions still route through them), a
/// liveness flag per anyon, and the contraction witnesses of the
/// shortcut metric. The left-right entry is pinned at
/// [`INFINITE_DISTANCE`] and never contracts.
#[derive(Clone, Debug)]
pub struct DistanceTable {
    nodes: Vec<Node>,
    num_anyons: usize,
    dist: Vec<usize>,
    alive: Vec<bool>,
    witness: Vec<Option<(u32, u32)>>,
}

/// Builds the initial distance table for a syndrome: all node distances,
/// every anyon alive, no witnesses.
pub fn init_table(geom: &CodeGeometry, syndrome: &Syndrome) -> DistanceTable {
    let num_anyons = syndrome.len();
    let mut nodes: Vec<Node> = Vec::with_capacity(num_anyons + 2);
    nodes.extend(syndrome.anyons.iter().map(|&(r, c)| Node::Anyon(r, c)));
    debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]), "syndrome not sorted");
    nodes.push(Node::Left);
    nodes.push(Node::Right);
    let n = nodes.len();
    let mut dist = vec![0usize; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = node_distance(geom, nodes[i], nodes[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    DistanceTable {
        nodes,
        num_anyons,
        dist,
        alive: vec![true; num_anyons],
        witness: Vec::new(),
    }
}

impl DistanceTable {
    /// All nodes in index order: anyons row-major, then left, then right.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Number of anyon nodes.
    pub fn num_anyons(&self) -> usize {
        self.num_anyons
    }

    /// Index of `node`, if it is part of this table.
    pub fn node_index(&self, node: Node) -> Option<usize> {
        // Nodes are fully sorted (anyons row-major, boundaries last).
        self.nodes.binary_search(&node).ok()
    }

    /// Current distance between two table nodes.
    pub fn distance(&self, a: Node, b: Node) -> Option<usize> {
        let (i, j) = (self.node_index(a)?, self.node_index(b)?);
        Some(self.dist_idx(i, j))
    }

    /// Whether an anyon node is still unpaired (boundaries are always live).
    pub fn is_alive(&self, node: Node) -> Option<bool> {
        let i = self.node_index(node)?;
        Some(i >= self.num_anyons || self.alive[i])
    }

    /// Witness of the last contraction that lowered `D(a, b)`, oriented
    /// so that the contracted route runs `a -> w.0 -> w.1 -> b`.
    pub fn witness(&self, a: Node, b: Node) -> Option<(Node, Node)> {
        let (i, j) = (self.node_index(a)?, self.node_index(b)?);
        let (c, d) = self.witness_idx(i, j)?;
        Some((self.nodes[c], self.nodes[d]))
    }

    fn n(&self) -> usize {
        self.nodes.len()
    }

    fn left_idx(&self) -> usize {
        self.num_anyons
    }

    fn right_idx(&self) -> usize {
        self.num_anyons + 1
    }

    fn dist_idx(&self, i: usize, j: usize) -> usize {
        self.dist[i * self.n() + j]
    }

    #[cfg(test)]
    pub(crate) fn set_dist_idx(&mut self, i: usize, j: usize, d: usize) {
        let n = self.n();
        self.dist[i * n + j] = d;
        self.dist[j * n + i] = d;
    }

    fn witness_idx(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        let (c, d) = (*self.witness.get(i * self.n() + j)?)?;
        Some((c as usize, d as usize))
    }

    fn kill(&mut self, i: usize) {
        debug_assert!(i < self.num_anyons && self.alive[i]);
        self.alive[i] = false;
    }

    /// Contracts every other pair through the just-annihilated `(c, d)`.
    fn contract_idx(&mut self, c: usize, d: usize) {
        let n = self.n();
        if self.witness.is_empty() {
            self.witness = vec![None; n * n];
        }
        let (left, right) = (self.left_idx(), self.right_idx());
        for x in 0..n {
            if x == c || x == d {
                continue;
            }
            let x_c = self.dist[x * n + c];
            let x_d = self.dist[x * n + d];
            for y in x + 1..n {
                if y == c || y == d || (x == left && y == right) {
                    continue;
                }
                let via_cd = x_c + self.dist[d * n + y];
                let via_dc = x_d + self.dist[c * n + y];
                let best = via_cd.min(via_dc);
                if best < self.dist[x * n + y] {
                    self.dist[x * n + y] = best;
                    self.dist[y * n + x] = best;
                    // Orientation is relative to the endpoint order: the
                    // route x -> w.0 .. w.1 -> y, reversed for (y, x).
                    let w = if via_cd <= via_dc {
                        (c as u32, d as u32)
                    } else {
                        (d as u32, c as u32)
                    };
                    self.witness[x * n + y] = Some(w);
                    self.witness[y * n + x] = Some((w.1, w.0));
                }
            }
        }
    }
}

/// Applies the shortcut contraction for an annihilated pair `(c, d)` to
/// every other unordered node pair of `table`, recording witnesses where
/// a distance strictly drops. The left-right entry is exempt: those two
/// nodes must stay mutually unreachable.
///
/// Panics if `c` or `d` is not a node of the table.
pub fn shortcut_update(table: &mut DistanceTable, c: Node, d: Node) {
    let ci = table
        .node_index(c)
        .unwrap_or_else(|| panic!("node {c} not in table"));
    let di = table
        .node_index(d)
        .unwrap_or_else(|| panic!("node {d} not in table"));
    assert_ne!(ci, di, "need two distinct nodes");
    table.contract_idx(ci, di);
}

struct Engine<'a> {
    geom: &'a CodeGeometry,
    table: DistanceTable,
    /// Physical chain applied for each annihilated pair, keyed by the
    /// unordered node-index pair. Only populated for the shortcut metric.
    stored: HashMap<(u32, u32), ErrorPattern>,
    shortcut: bool,
    count_ops: bool,
    alive_count: usize,
    correction: ErrorPattern,
    pairings: Vec<Pairing>,
    examined: u64,
    left_pairings: usize,
    right_pairings: usize,
}

impl<'a> Engine<'a> {
    fn new(geom: &'a CodeGeometry, syndrome: &Syndrome, config: &DecoderConfig) -> Self {
        let table = init_table(geom, syndrome);
        Engine {
            geom,
            alive_count: table.num_anyons(),
            table,
            stored: HashMap::new(),
            shortcut: config.metric == Metric::Shortcut,
            count_ops: config.count_ops,
            correction: geom.empty_pattern(),
            pairings: Vec::new(),
            examined: 0,
            left_pairings: 0,
            right_pairings: 0,
        }
    }

    /// Nearest partner of anyon `a`: live anyons in index order, then
    /// left, then right, keeping the first of equally distant
    /// candidates — which implements the tie rule.
    fn nearest_partner(&mut self, a: usize) -> (usize, usize) {
        let n = self.table.n();
        let row = &self.table.dist[a * n..(a + 1) * n];
        let mut best_d = INFINITE_DISTANCE;
        let mut best = self.table.left_idx();
        for (b, alive) in self.table.alive.iter().enumerate() {
            if b == a || !alive {
                continue;
            }
            if row[b] < best_d {
                best_d = row[b];
                best = b;
            }
        }
        for b in [self.table.left_idx(), self.table.right_idx()] {
            if row[b] < best_d {
                best_d = row[b];
                best = b;
            }
        }
        if self.count_ops {
            // One candidate per live anyon other than `a`, plus the two
            // boundaries.
            self.examined += (self.alive_count - 1 + 2) as u64;
        }
        (best_d, best)
    }

    /// Expands the pair `(x, y)` into a physical chain, following
    /// contraction witnesses down to geodesics of the original metric
    /// and splicing in the chains stored when witness pairs annihilated.
    fn expand_chain(&self, x: usize, y: usize) -> Result<ErrorPattern> {
        match self.table.witness_idx(x, y) {
            None => geodesic_qubits(self.geom, self.table.nodes[x], self.table.nodes[y])
                .map_err(|_| Error::Internal("expansion reached a boundary-boundary chain")),
            Some((c, d)) => {
                let key = (c.min(d) as u32, c.max(d) as u32);
                let stored = self
                    .stored
                    .get(&key)
                    .ok_or(Error::Internal("missing stored chain for witness pair"))?;
                let mut chain = self.expand_chain(x, c)?;
                chain ^= stored;
                chain ^= &self.expand_chain(d, y)?;
                Ok(chain)
            }
        }
    }

    fn annihilate(&mut self, a: usize, b: usize, k: usize) -> Result<()> {
        let chain = self.expand_chain(a, b)?;
        self.correction ^= &chain;
        self.pairings.push(Pairing {
            a: self.table.nodes[a],
            b: self.table.nodes[b],
            k,
        });
        self.table.kill(a);
        self.alive_count -= 1;
        if b < self.table.num_anyons() {
            self.table.kill(b);
            self.alive_count -= 1;
        } else if b == self.table.left_idx() {
            self.left_pairings += 1;
        } else {
            self.right_pairings += 1;
        }
        if self.shortcut {
            self.stored.insert((a.min(b) as u32, a.max(b) as u32), chain);
            self.table.contract_idx(a, b);
        }
        Ok(())
    }

    fn run(mut self) -> Result<DecodeResult> {
        let bound = 2 * self.geom.l();
        let mut k = 1usize;
        let mut k_max = 0usize;
        while self.alive_count > 0 {
            if k > bound {
                return Err(Error::SearchBoundExceeded { k, bound });
            }
            let mut annihilated = false;
            let mut next_k = INFINITE_DISTANCE;
            for a in 0..self.table.num_anyons() {
                if !self.table.alive[a] {
                    continue;
                }
                let (best_d, best) = self.nearest_partner(a);
                if best_d <= k {
                    self.annihilate(a, best, k)?;
                    k_max = k;
                    annihilated = true;
                } else if best_d < next_k {
                    next_k = best_d;
                }
            }
            if self.alive_count == 0 {
                break;
            }
            if !annihilated {
                // An unproductive sweep leaves no state behind, so the
                // levels between k and the nearest candidate distance
                // would all sweep emptily: jump straight to it. Every
                // anyon has a boundary within L-1, so next_k is finite.
                debug_assert!(next_k > k);
                k = next_k;
            }
        }
        Ok(DecodeResult {
            correction: self.correction,
            pairings: self.pairings,
            k_max,
            examined_pairs: self.examined,
            left_pairings: self.left_pairings,
            right_pairings: self.right_pairings,
        })
    }
}

/// Decodes a syndrome: pairs every anyon with a partner or a boundary
/// and returns the accumulated correction.
///
/// The correction always neutralizes the syndrome. Whether it undoes
/// the error is the logical-failure question answered by
/// [`crate::geometry::is_logical_failure`] on `error XOR correction`.
pub fn decode(geom: &CodeGeometry, syndrome: &Syndrome, config: &DecoderConfig) -> Result<DecodeResult> {
    Engine::new(geom, syndrome, config).run()
}

/// Standard-metric decoder that probes concentric plaquette rings
/// instead of a distance table.
///
/// Produces exactly the pairings, correction and `k_max` of
/// [`decode`] with [`Metric::Standard`]; only `examined_pairs` differs
/// (it counts ring cells probed). Memory is O(plaquettes) instead of
/// O(anyons^2), which matters on very large lattices.
pub fn decode_ring_scan(geom: &CodeGeometry, syndrome: &Syndrome) -> Result<DecodeResult> {
    let num_anyons = syndrome.len();
    let anyons: Vec<(usize, usize)> = syndrome.anyons.clone();
    let rows = geom.plaquette_rows() as isize;
    let cols = geom.plaquette_cols() as isize;
    const EMPTY: u32 = u32::MAX;
    let mut grid = vec![EMPTY; geom.num_plaquettes()];
    for (i, &(r, c)) in anyons.iter().enumerate() {
        grid[geom.plaquette_id(r, c)] = i as u32;
    }
    let mut alive = vec![true; num_anyons];
    let mut alive_count = num_anyons;
    let mut correction = geom.empty_pattern();
    let mut pairings = Vec::new();
    let mut probes: u64 = 0;
    let (mut left_pairings, mut right_pairings) = (0, 0);
    let bound = 2 * geom.l();
    let mut k = 1usize;
    let mut k_max = 0usize;
    while alive_count > 0 {
        if k > bound {
            return Err(Error::SearchBoundExceeded { k, bound });
        }
        let mut annihilated = false;
        for a in 0..num_anyons {
            if !alive[a] {
                continue;
            }
            let (ar, ac) = (anyons[a].0 as isize, anyons[a].1 as isize);
            // Probe distances in increasing order; within one distance
            // the ring cells are visited row-major, which matches the
            // node-index tie rule, and the boundaries come after the
            // anyons of the same distance.
            let mut found: Option<Node> = None;
            let mut found_d = 0;
            'scan: for d in 1..=k {
                let di = d as isize;
                for dr in -di..=di {
                    let r = ar + dr;
                    if r < 0 || r >= rows {
                        continue;
                    }
                    let rem = di - dr.abs();
                    let offsets: &[isize] = if rem == 0 { &[0] } else { &[-rem, rem] };
                    for &dc in offsets {
                        let c = ac + dc;
                        if c < 0 || c >= cols {
                            continue;
                        }
                        probes += 1;
                        let cell = grid[geom.plaquette_id(r as usize, c as usize)];
                        if cell != EMPTY && alive[cell as usize] && cell as usize != a {
                            let (br, bc) = anyons[cell as usize];
                            found = Some(Node::Anyon(br, bc));
                            found_d = d;
                            break 'scan;
                        }
                    }
                }
                probes += 2;
                if ac as usize + 1 == d {
                    found = Some(Node::Left);
                    found_d = d;
                    break 'scan;
                }
                if geom.l() - 1 - ac as usize == d {
                    found = Some(Node::Right);
                    found_d = d;
                    break 'scan;
                }
            }
            if let Some(partner) = found {
                let me = Node::Anyon(anyons[a].0, anyons[a].1);
                let chain = geodesic_qubits(geom, me, partner)
                    .map_err(|_| Error::Internal("ring scan paired two boundaries"))?;
                correction ^= &chain;
                pairings.push(Pairing {
                    a: me,
                    b: partner,
                    k,
                });
                alive[a] = false;
                grid[geom.plaquette_id(anyons[a].0, anyons[a].1)] = EMPTY;
                alive_count -= 1;
                match partner {
                    Node::Anyon(br, bc) => {
                        let b = grid[geom.plaquette_id(br, bc)] as usize;
                        alive[b] = false;
                        grid[geom.plaquette_id(br, bc)] = EMPTY;
                        alive_count -= 1;
                    }
                    Node::Left => left_pairings += 1,
                    Node::Right => right_pairings += 1,
                }
                // Distances never shrink under the standard metric, so a
                // partner always turns up at exactly the current level.
                debug_assert_eq!(found_d, k);
                k_max = k;
                annihilated = true;
            }
        }
        if alive_count == 0 {
            break;
        }
        if !annihilated {
            k += 1;
        }
    }
    Ok(DecodeResult {
        correction,
        pairings,
        k_max,
        examined_pairs: probes,
        left_pairings,
        right_pairings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, syndrome_of, Qubit};

    fn geom(l: usize) -> CodeGeometry {
        build_geometry(l).unwrap()
    }

    fn syndrome(anyons: &[(usize, usize)]) -> Syndrome {
        let mut anyons = anyons.to_vec();
        anyons.sort_unstable();
        Syndrome { anyons }
    }

    fn pattern_of(geom: &CodeGeometry, qubits: &[Qubit]) -> ErrorPattern {
        let ids: Vec<usize> = qubits.iter().map(|&q| geom.qubit_id(q)).collect();
        ErrorPattern::from_qubit_ids(geom.num_qubits(), &ids).unwrap()
    }

    #[test]
    fn test_empty_syndrome_decodes_to_nothing() {
        let g = geom(5);
        for config in [DecoderConfig::standard(), DecoderConfig::shortcut()] {
            let result = decode(&g, &Syndrome::empty(), &config).unwrap();
            assert!(result.correction.is_empty());
            assert!(result.pairings.is_empty());
            assert_eq!(result.k_max, 0);
        }
    }

    #[test]
    fn test_single_anyon_takes_nearest_boundary() {
        let g = geom(5);
        let result = decode(&g, &syndrome(&[(0, 0)]), &DecoderConfig::standard()).unwrap();
        assert_eq!(
            result.pairings,
            vec![Pairing {
                a: Node::Anyon(0, 0),
                b: Node::Left,
                k: 1
            }]
        );
        assert_eq!(
            result.correction,
            pattern_of(&g, &[Qubit::LeftBoundary { row: 0 }])
        );
        assert_eq!(result.left_pairings, 1);
        assert_eq!(result.k_max, 1);
    }

    #[test]
    fn test_boundary_tie_prefers_left() {
        // On L=2 an anyon is one step from both boundaries; the node
        // order breaks the tie towards the left.
        let g = geom(2);
        let result = decode(&g, &syndrome(&[(1, 0)]), &DecoderConfig::standard()).unwrap();
        assert_eq!(result.pairings[0].b, Node::Left);
        assert_eq!(
            result.correction,
            pattern_of(&g, &[Qubit::LeftBoundary { row: 1 }])
        );
    }

    #[test]
    fn test_adjacent_anyons_pair_with_each_other() {
        let g = geom(5);
        let result = decode(&g, &syndrome(&[(2, 1), (2, 2)]), &DecoderConfig::standard()).unwrap();
        assert_eq!(
            result.pairings,
            vec![Pairing {
                a: Node::Anyon(2, 1),
                b: Node::Anyon(2, 2),
                k: 1
            }]
        );
        assert_eq!(
            result.correction,
            pattern_of(&g, &[Qubit::Horizontal { row: 2, col: 1 }])
        );
    }

    #[test]
    fn test_anyon_beats_boundary_on_distance_tie() {
        // Anyon (r,0) is 1 from the left boundary; an adjacent anyon at
        // (r,1) is also at 1. The anyon must win the tie.
        let g = geom(6);
        let result = decode(&g, &syndrome(&[(3, 0), (3, 1)]), &DecoderConfig::standard()).unwrap();
        assert_eq!(
            result.pairings,
            vec![Pairing {
                a: Node::Anyon(3, 0),
                b: Node::Anyon(3, 1),
                k: 1
            }]
        );
    }

    #[test]
    fn test_close_pairs_consumed_before_distant_ones() {
        // (0,2)-(0,3) pair at k=1 before the lone (4,0) reaches the
        // boundary at k=1 too; order within the sweep is node order.
        let g = geom(7);
        let result = decode(
            &g,
            &syndrome(&[(0, 2), (0, 3), (4, 0)]),
            &DecoderConfig::standard(),
        )
        .unwrap();
        assert_eq!(result.pairings.len(), 2);
        assert_eq!(result.pairings[0].a, Node::Anyon(0, 2));
        assert_eq!(result.pairings[0].b, Node::Anyon(0, 3));
        assert_eq!(result.pairings[0].k, 1);
        assert_eq!(result.pairings[1].a, Node::Anyon(4, 0));
        assert_eq!(result.pairings[1].b, Node::Left);
        assert_eq!(result.pairings[1].k, 1);
    }

    #[test]
    fn test_search_distance_never_shrinks_and_matches_standard_metric() {
        let g = geom(9);
        let result = decode(
            &g,
            &syndrome(&[(0, 0), (2, 5), (6, 1), (8, 7), (4, 4)]),
            &DecoderConfig::standard(),
        )
        .unwrap();
        let mut last_k = 0;
        for p in &result.pairings {
            assert!(p.k >= last_k, "k went backwards");
            last_k = p.k;
            // In the standard metric an annihilation happens exactly
            // when k reaches the pair's node distance.
            assert_eq!(node_distance(&g, p.a, p.b), p.k);
        }
        assert_eq!(result.k_max, last_k);
    }

    #[test]
    fn test_correction_neutralizes_syndrome() {
        let g = geom(8);
        let s = syndrome(&[(0, 1), (1, 6), (3, 3), (5, 0), (7, 5), (7, 6)]);
        for config in [DecoderConfig::standard(), DecoderConfig::shortcut()] {
            let result = decode(&g, &s, &config).unwrap();
            assert_eq!(syndrome_of(&g, &result.correction), s);
        }
    }

    #[test]
    fn test_contraction_arithmetic_and_witness() {
        // Four far-apart anyons so initial distances are easy to
        // overwrite: a=(0,0), b=(0,9), c=(5,0), d=(5,9).
        let g = geom(11);
        let (a, b, c, d) = (
            Node::Anyon(0, 0),
            Node::Anyon(0, 9),
            Node::Anyon(5, 0),
            Node::Anyon(5, 9),
        );
        let mut table = init_table(&g, &syndrome(&[(0, 0), (0, 9), (5, 0), (5, 9)]));
        let idx = |t: &DistanceTable, n: Node| t.node_index(n).unwrap();
        let (ai, bi, ci, di) = (idx(&table, a), idx(&table, b), idx(&table, c), idx(&table, d));
        table.set_dist_idx(ai, bi, 10);
        table.set_dist_idx(ai, ci, 2);
        table.set_dist_idx(di, bi, 3);
        table.set_dist_idx(ai, di, 9);
        table.set_dist_idx(ci, bi, 9);
        shortcut_update(&mut table, c, d);
        // D(a,b) contracts to D(a,c) + D(d,b) = 5 through witness (c,d).
        assert_eq!(table.distance(a, b), Some(5));
        assert_eq!(table.witness(a, b), Some((c, d)));
        // Seen from b the same route is traversed backwards.
        assert_eq!(table.witness(b, a), Some((d, c)));
    }

    #[test]
    fn test_contraction_leaves_boundary_pair_unreachable() {
        let g = geom(9);
        let mut table = init_table(&g, &syndrome(&[(4, 3), (4, 4)]));
        shortcut_update(&mut table, Node::Anyon(4, 3), Node::Anyon(4, 4));
        assert_eq!(
            table.distance(Node::Left, Node::Right),
            Some(INFINITE_DISTANCE)
        );
        // But boundary-to-anyon entries do contract when shorter.
        let mut table = init_table(&g, &syndrome(&[(4, 1), (4, 6), (4, 7)]));
        shortcut_update(&mut table, Node::Anyon(4, 6), Node::Anyon(4, 7));
        // D((4,1), RIGHT) was 7; via (4,6)..(4,7) it is 5 + 1 = 6.
        assert_eq!(table.distance(Node::Anyon(4, 1), Node::Right), Some(6));
    }

    #[test]
    fn test_distances_never_increase_under_contraction() {
        let g = geom(9);
        let s = syndrome(&[(0, 0), (1, 4), (3, 2), (7, 7), (8, 0), (8, 3)]);
        let mut table = init_table(&g, &s);
        let before = table.dist.clone();
        shortcut_update(&mut table, Node::Anyon(1, 4), Node::Anyon(3, 2));
        shortcut_update(&mut table, Node::Anyon(0, 0), Node::Left);
        for (new, old) in table.dist.iter().zip(&before) {
            assert!(new <= old);
        }
    }

    // The four-error hierarchical cluster that defeats the standard
    // metric on L=12: errors H(0,3), H(0,4), H(0,6), H(0,7) leave anyons
    // in columns 3, 5, 6, 8 of row 0.
    fn cluster_l12(g: &CodeGeometry) -> ErrorPattern {
        pattern_of(
            g,
            &[
                Qubit::Horizontal { row: 0, col: 3 },
                Qubit::Horizontal { row: 0, col: 4 },
                Qubit::Horizontal { row: 0, col: 6 },
                Qubit::Horizontal { row: 0, col: 7 },
            ],
        )
    }

    #[test]
    fn test_standard_metric_walks_into_the_cluster_trap() {
        let g = geom(12);
        let error = cluster_l12(&g);
        let s = syndrome_of(&g, &error);
        assert_eq!(s.anyons, vec![(0, 3), (0, 5), (0, 6), (0, 8)]);
        let result = decode(&g, &s, &DecoderConfig::standard()).unwrap();
        assert_eq!(
            result.pairings,
            vec![
                Pairing {
                    a: Node::Anyon(0, 5),
                    b: Node::Anyon(0, 6),
                    k: 1
                },
                Pairing {
                    a: Node::Anyon(0, 8),
                    b: Node::Right,
                    k: 3
                },
                Pairing {
                    a: Node::Anyon(0, 3),
                    b: Node::Left,
                    k: 4
                },
            ]
        );
        let mut residual = error;
        residual ^= &result.correction;
        assert!(crate::geometry::is_logical_failure(&g, &residual).unwrap());
    }

    #[test]
    fn test_shortcut_metric_disarms_the_cluster_on_l15() {
        // Same cluster shape shifted to columns 5..9 on L=15: anyons in
        // columns 5, 7, 8, 10.
        let g = geom(15);
        let error = pattern_of(
            &g,
            &[
                Qubit::Horizontal { row: 0, col: 5 },
                Qubit::Horizontal { row: 0, col: 6 },
                Qubit::Horizontal { row: 0, col: 8 },
                Qubit::Horizontal { row: 0, col: 9 },
            ],
        );
        let s = syndrome_of(&g, &error);
        assert_eq!(s.anyons, vec![(0, 5), (0, 7), (0, 8), (0, 10)]);

        // The standard metric pairs the middle anyons, then walks both
        // outer anyons to the boundaries: a spanning failure.
        let std = decode(&g, &s, &DecoderConfig::standard()).unwrap();
        let mut residual = error.clone();
        residual ^= &std.correction;
        assert!(crate::geometry::is_logical_failure(&g, &residual).unwrap());

        // The shortcut metric contracts D((0,5),(0,10)) through the
        // annihilated middle pair to 2+1+... = 4, which ties the outer
        // anyon's boundary distance; the anyon wins the tie and the
        // whole cluster is corrected.
        let short = decode(&g, &s, &DecoderConfig::shortcut()).unwrap();
        assert_eq!(
            short.pairings,
            vec![
                Pairing {
                    a: Node::Anyon(0, 7),
                    b: Node::Anyon(0, 8),
                    k: 1
                },
                Pairing {
                    a: Node::Anyon(0, 5),
                    b: Node::Anyon(0, 10),
                    k: 4
                },
            ]
        );
        // The expanded chain for the witnessed pair is the contiguous
        // run H(0,5)..H(0,9).
        let mut residual = error;
        residual ^= &short.correction;
        assert!(!crate::geometry::is_logical_failure(&g, &residual).unwrap());
        assert!(residual.is_empty());
    }

    #[test]
    fn test_ring_scan_matches_table_engine() {
        let g = geom(12);
        let error = cluster_l12(&g);
        let s = syndrome_of(&g, &error);
        let table = decode(&g, &s, &DecoderConfig::standard()).unwrap();
        let ring = decode_ring_scan(&g, &s).unwrap();
        assert_eq!(ring.pairings, table.pairings);
        assert_eq!(ring.correction, table.correction);
        assert_eq!(ring.k_max, table.k_max);
    }

    #[test]
    fn test_decode_is_deterministic() {
        let g = geom(10);
        let s = syndrome(&[(0, 3), (2, 2), (2, 3), (5, 8), (9, 0), (9, 1)]);
        for config in [DecoderConfig::standard(), DecoderConfig::shortcut()] {
            let first = decode(&g, &s, &config).unwrap();
            let second = decode(&g, &s, &config).unwrap();
            assert_eq!(first, second);
        }
    }

    #[test]
    fn test_op_counter_flag() {
        let g = geom(10);
        let s = syndrome(&[(0, 3), (2, 2), (2, 3), (5, 8)]);
        let counted = decode(&g, &s, &DecoderConfig::standard()).unwrap();
        assert!(counted.examined_pairs > 0);
        let uncounted = decode(
            &g,
            &s,
            &DecoderConfig {
                metric: Metric::Standard,
                count_ops: false,
            },
        )
        .unwrap();
        assert_eq!(uncounted.examined_pairs, 0);
        assert_eq!(uncounted.pairings, counted.pairings);
    }
}
