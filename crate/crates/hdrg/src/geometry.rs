//! Lattice geometry for the bit-flip sector of the planar code.
//!
//! Only the plaquette (Z-check) sector is modelled: errors are X flips,
//! checks are plaquette operators, and a logical failure is an X chain
//! spanning the lattice from the left rough boundary to the right one.
//! The Z sector of the planar code is the same picture rotated by 90
//! degrees, so nothing is lost by simulating one sector.
//!
//! A distance-`L` patch has an `L x (L-1)` grid of plaquettes, indexed by
//! `(row, col)` with `row in 0..L` and `col in 0..L-1`. Qubits come in
//! four blocks, named by how they sit relative to that grid:
//!
//! * `H(r, c)` for `c in 0..L-2` — horizontal interior qubit between
//!   plaquettes `(r, c)` and `(r, c+1)`; flipping it toggles both.
//! * `BL(r)` — left boundary qubit of row `r`; toggles only `(r, 0)`.
//! * `BR(r)` — right boundary qubit of row `r`; toggles only `(r, L-2)`.
//! * `V(r, c)` for `r in 0..L-1`, `c in 0..L-1` — vertical qubit between
//!   plaquettes `(r, c)` and `(r+1, c)`; toggles both.
//!
//! The total qubit count is `L(L-2) + 2L + (L-1)^2 = 2L^2 - 2L + 1`.
//!
//! Qubit ids are assigned in the block order `H`, `BL`, `BR`, `V`,
//! row-major within each block, and plaquette ids are `r * (L-1) + c`.
//! These ids are stable and are the on-disk representation of error
//! patterns (a pattern file is a sorted JSON array of qubit ids), so the
//! ordering here must not change.
//!
//! Flipped plaquettes are "anyons". Together with two virtual boundary
//! nodes ([`Node::Left`] and [`Node::Right`]) they are the vertices the
//! decoder pairs up. An anyon at `(r, c)` can be pushed into the left
//! boundary by `c + 1` flips, into the right by `L - 1 - c` flips, and
//! onto another anyon by a staircase of `|dr| + |dc|` flips; those are
//! exactly the node distances below. The two boundary nodes are mutually
//! unreachable: a chain joining them is a logical operator, not a
//! correction, and the decoder must never be tempted into one.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::{Error, Result};

/// Sentinel distance for node pairs that must never be matched.
///
/// Kept far below `usize::MAX` so sums of two distances cannot overflow.
pub const INFINITE_DISTANCE: usize = usize::MAX / 4;

/// One physical qubit, identified by its role in the lattice.
///
/// See the module docs for the coordinate conventions of each block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qubit {
    /// Interior horizontal qubit between plaquettes `(row, col)` and `(row, col+1)`.
    Horizontal { row: usize, col: usize },
    /// Left boundary qubit of `row`; touches only plaquette `(row, 0)`.
    LeftBoundary { row: usize },
    /// Right boundary qubit of `row`; touches only plaquette `(row, L-2)`.
    RightBoundary { row: usize },
    /// Vertical qubit between plaquettes `(row, col)` and `(row+1, col)`.
    Vertical { row: usize, col: usize },
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Qubit::Horizontal { row, col } => write!(f, "H({row},{col})"),
            Qubit::LeftBoundary { row } => write!(f, "BL({row})"),
            Qubit::RightBoundary { row } => write!(f, "BR({row})"),
            Qubit::Vertical { row, col } => write!(f, "V({row},{col})"),
        }
    }
}

/// A vertex the decoder can pair: an anyon or one of the two boundaries.
///
/// Anyons are ordered row-major; `Left` sorts after every anyon and
/// `Right` after `Left`. Tie-breaking in the decoder leans on this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// A flipped plaquette at `(row, col)`.
    Anyon(usize, usize),
    /// The virtual node behind the left rough boundary.
    Left,
    /// The virtual node behind the right rough boundary.
    Right,
}

impl Node {
    /// True for the two virtual boundary nodes.
    pub fn is_boundary(self) -> bool {
        matches!(self, Node::Left | Node::Right)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Node::Anyon(r, c) => write!(f, "({r},{c})"),
            Node::Left => write!(f, "LEFT"),
            Node::Right => write!(f, "RIGHT"),
        }
    }
}

/// Dense set of flipped qubits, stored as a bit vector over qubit ids.
///
/// Patterns over the same lattice form a group under XOR (`^=`): applying
/// a correction is XOR-composition, and a pattern composed with itself
/// vanishes. Equality, hashing and serialization all go through the
/// canonical sorted id list.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ErrorPattern {
    words: Vec<u64>,
    num_qubits: usize,
}

impl ErrorPattern {
    /// Empty pattern over `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Self {
        ErrorPattern {
            words: vec![0; num_qubits.div_ceil(64)],
            num_qubits,
        }
    }

    /// Builds a pattern from explicit qubit ids (duplicates toggle twice).
    pub fn from_qubit_ids(num_qubits: usize, ids: &[usize]) -> Result<Self> {
        let mut pattern = ErrorPattern::new(num_qubits);
        for &id in ids {
            if id >= num_qubits {
                return Err(Error::QubitOutOfRange { id, num_qubits });
            }
            pattern.toggle(id);
        }
        Ok(pattern)
    }

    /// Number of qubits this pattern ranges over.
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Flips qubit `id`.
    pub fn toggle(&mut self, id: usize) {
        debug_assert!(id < self.num_qubits);
        self.words[id / 64] ^= 1u64 << (id % 64);
    }

    /// Whether qubit `id` is flipped.
    pub fn contains(&self, id: usize) -> bool {
        debug_assert!(id < self.num_qubits);
        self.words[id / 64] >> (id % 64) & 1 == 1
    }

    /// Number of flipped qubits.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True when no qubit is flipped.
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Iterates flipped qubit ids in increasing order.
    pub fn ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    /// Sorted list of flipped qubit ids — the canonical serialized form.
    pub fn qubit_ids(&self) -> Vec<usize> {
        self.ones().collect()
    }
}

/// Iterator over the flipped qubit ids of an [`ErrorPattern`].
pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.index * 64 + bit)
    }
}

impl std::ops::BitXorAssign<&ErrorPattern> for ErrorPattern {
    fn bitxor_assign(&mut self, rhs: &ErrorPattern) {
        assert_eq!(
            self.num_qubits, rhs.num_qubits,
            "cannot compose patterns over different lattices"
        );
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl fmt::Debug for ErrorPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ErrorPattern{:?}", self.qubit_ids())
    }
}

/// The set of flipped plaquettes produced by an error pattern.
///
/// Anyon coordinates are kept sorted row-major, which is also the node
/// order the decoder iterates in.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syndrome {
    /// Occupied plaquettes as `(row, col)`, sorted row-major.
    pub anyons: Vec<(usize, usize)>,
}

impl Syndrome {
    /// Syndrome with no anyons.
    pub fn empty() -> Self {
        Syndrome::default()
    }

    /// Number of anyons.
    pub fn len(&self) -> usize {
        self.anyons.len()
    }

    /// True when no check is flagged.
    pub fn is_empty(&self) -> bool {
        self.anyons.is_empty()
    }
}

/// Static description of one distance-`L` lattice.
///
/// Construction is cheap; all incidence queries are closed-form
/// arithmetic on the block layout described in the module docs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeGeometry {
    l: usize,
    h_count: usize,
    num_qubits: usize,
}

/// Builds the geometry for a distance-`l` planar patch.
///
/// Fails for `l < 2`: a distance-1 "lattice" has no plaquettes at all.
pub fn build_geometry(l: usize) -> Result<CodeGeometry> {
    if l < 2 {
        return Err(Error::InvalidLatticeSize(l));
    }
    let h_count = l * (l - 2);
    Ok(CodeGeometry {
        l,
        h_count,
        num_qubits: 2 * l * l - 2 * l + 1,
    })
}

impl CodeGeometry {
    /// The code distance `L`.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Total number of physical qubits, `2L^2 - 2L + 1`.
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of plaquette rows (`L`).
    pub fn plaquette_rows(&self) -> usize {
        self.l
    }

    /// Number of plaquette columns (`L - 1`).
    pub fn plaquette_cols(&self) -> usize {
        self.l - 1
    }

    /// Total number of plaquettes.
    pub fn num_plaquettes(&self) -> usize {
        self.l * (self.l - 1)
    }

    /// Stable plaquette id `row * (L-1) + col`.
    pub fn plaquette_id(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.plaquette_rows() && col < self.plaquette_cols());
        row * self.plaquette_cols() + col
    }

    /// Inverse of [`plaquette_id`](Self::plaquette_id).
    pub fn plaquette_coords(&self, id: usize) -> (usize, usize) {
        debug_assert!(id < self.num_plaquettes());
        (id / self.plaquette_cols(), id % self.plaquette_cols())
    }

    /// Stable qubit id of `qubit` (block order `H`, `BL`, `BR`, `V`).
    pub fn qubit_id(&self, qubit: Qubit) -> usize {
        let l = self.l;
        match qubit {
            Qubit::Horizontal { row, col } => {
                debug_assert!(row < l && col + 2 < l, "no qubit {qubit} on L={l}");
                row * (l - 2) + col
            }
            Qubit::LeftBoundary { row } => {
                debug_assert!(row < l);
                self.h_count + row
            }
            Qubit::RightBoundary { row } => {
                debug_assert!(row < l);
                self.h_count + l + row
            }
            Qubit::Vertical { row, col } => {
                debug_assert!(row + 1 < l && col + 1 < l);
                self.h_count + 2 * l + row * (l - 1) + col
            }
        }
    }

    /// Inverse of [`qubit_id`](Self::qubit_id).
    pub fn qubit(&self, id: usize) -> Qubit {
        debug_assert!(id < self.num_qubits, "qubit id {id} out of range");
        let l = self.l;
        if id < self.h_count {
            Qubit::Horizontal {
                row: id / (l - 2),
                col: id % (l - 2),
            }
        } else if id < self.h_count + l {
            Qubit::LeftBoundary {
                row: id - self.h_count,
            }
        } else if id < self.h_count + 2 * l {
            Qubit::RightBoundary {
                row: id - self.h_count - l,
            }
        } else {
            let v = id - self.h_count - 2 * l;
            Qubit::Vertical {
                row: v / (l - 1),
                col: v % (l - 1),
            }
        }
    }

    /// Plaquette ids toggled by flipping qubit `id` (one or two of them).
    pub fn qubit_plaquette_ids(&self, id: usize) -> (usize, Option<usize>) {
        match self.qubit(id) {
            Qubit::Horizontal { row, col } => (
                self.plaquette_id(row, col),
                Some(self.plaquette_id(row, col + 1)),
            ),
            Qubit::LeftBoundary { row } => (self.plaquette_id(row, 0), None),
            Qubit::RightBoundary { row } => (self.plaquette_id(row, self.l - 2), None),
            Qubit::Vertical { row, col } => (
                self.plaquette_id(row, col),
                Some(self.plaquette_id(row + 1, col)),
            ),
        }
    }

    /// Qubit ids whose flip toggles plaquette `(row, col)` (up to four).
    pub fn plaquette_qubit_ids(&self, row: usize, col: usize) -> Vec<usize> {
        let l = self.l;
        let mut out = Vec::with_capacity(4);
        out.push(if col == 0 {
            self.qubit_id(Qubit::LeftBoundary { row })
        } else {
            self.qubit_id(Qubit::Horizontal { row, col: col - 1 })
        });
        out.push(if col == l - 2 {
            self.qubit_id(Qubit::RightBoundary { row })
        } else {
            self.qubit_id(Qubit::Horizontal { row, col })
        });
        if row > 0 {
            out.push(self.qubit_id(Qubit::Vertical { row: row - 1, col }));
        }
        if row + 1 < l {
            out.push(self.qubit_id(Qubit::Vertical { row, col }));
        }
        out
    }

    /// Qubits sharing at least one plaquette with `id` (at most six).
    ///
    /// This is the neighbour relation used by the correlated noise model.
    pub fn co_plaquette_neighbors(&self, id: usize) -> Vec<usize> {
        let (p0, p1) = self.qubit_plaquette_ids(id);
        let mut out = Vec::with_capacity(6);
        let push_plaquette = |out: &mut Vec<usize>, p: usize| {
            let (r, c) = self.plaquette_coords(p);
            for q in self.plaquette_qubit_ids(r, c) {
                if q != id && !out.contains(&q) {
                    out.push(q);
                }
            }
        };
        push_plaquette(&mut out, p0);
        if let Some(p1) = p1 {
            push_plaquette(&mut out, p1);
        }
        out.sort_unstable();
        out
    }

    /// Empty pattern sized for this lattice.
    pub fn empty_pattern(&self) -> ErrorPattern {
        ErrorPattern::new(self.num_qubits)
    }
}

/// Computes the syndrome of `pattern`: the XOR of per-qubit plaquette
/// toggles, so `syndrome_of(a ^ b)` is the symmetric difference of the
/// two individual syndromes.
pub fn syndrome_of(geom: &CodeGeometry, pattern: &ErrorPattern) -> Syndrome {
    assert_eq!(
        pattern.num_qubits(),
        geom.num_qubits(),
        "pattern does not match lattice size"
    );
    let mut flags = vec![0u64; geom.num_plaquettes().div_ceil(64)];
    for id in pattern.ones() {
        let (p0, p1) = geom.qubit_plaquette_ids(id);
        flags[p0 / 64] ^= 1u64 << (p0 % 64);
        if let Some(p1) = p1 {
            flags[p1 / 64] ^= 1u64 << (p1 % 64);
        }
    }
    let mut anyons = Vec::new();
    for (i, &word) in flags.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let p = i * 64 + w.trailing_zeros() as usize;
            anyons.push(geom.plaquette_coords(p));
            w &= w - 1;
        }
    }
    // Plaquette ids are row-major, so scanning words in order yields the
    // sorted anyon list directly.
    Syndrome { anyons }
}

/// Separation the decoder uses between two pairable nodes.
///
/// Anyon to anyon is the Manhattan distance on the plaquette grid; anyon
/// `(r, c)` to the left boundary costs `c + 1` flips and to the right
/// boundary `L - 1 - c`; the two boundaries are mutually unreachable
/// ([`INFINITE_DISTANCE`]).
pub fn node_distance(geom: &CodeGeometry, a: Node, b: Node) -> usize {
    debug_assert!(a != b, "node_distance needs two distinct nodes");
    match (a, b) {
        (Node::Anyon(r1, c1), Node::Anyon(r2, c2)) => r1.abs_diff(r2) + c1.abs_diff(c2),
        (Node::Anyon(_, c), Node::Left) | (Node::Left, Node::Anyon(_, c)) => c + 1,
        (Node::Anyon(_, c), Node::Right) | (Node::Right, Node::Anyon(_, c)) => geom.l() - 1 - c,
        (Node::Left, Node::Right) | (Node::Right, Node::Left) => INFINITE_DISTANCE,
        _ => unreachable!("a == b case rejected above"),
    }
}

/// Canonical minimum-weight chain of flips joining two nodes.
///
/// For two anyons the chain runs vertically first (in the column of `a`)
/// and then horizontally (in the row of `b`); for an anyon and a
/// boundary it runs straight sideways and ends on the boundary qubit.
/// Any other minimum-length chain differs from this one only by a
/// trivial (syndrome-free, non-spanning) loop, so the choice does not
/// affect decoding outcomes.
///
/// Asking for a chain between the two boundary nodes is refused: such a
/// chain would be a logical operator.
pub fn geodesic_qubits(geom: &CodeGeometry, a: Node, b: Node) -> Result<ErrorPattern> {
    let mut pattern = geom.empty_pattern();
    let (a, b) = match (a, b) {
        (Node::Left, Node::Right) | (Node::Right, Node::Left) => return Err(Error::VirtualPair),
        // Route boundary-to-anyon chains from the anyon's side.
        (bound, anyon @ Node::Anyon(..)) if bound.is_boundary() => (anyon, bound),
        other => other,
    };
    let Node::Anyon(ar, ac) = a else {
        return Err(Error::VirtualPair);
    };
    match b {
        Node::Anyon(br, bc) => {
            for row in ar.min(br)..ar.max(br) {
                pattern.toggle(geom.qubit_id(Qubit::Vertical { row, col: ac }));
            }
            for col in ac.min(bc)..ac.max(bc) {
                pattern.toggle(geom.qubit_id(Qubit::Horizontal { row: br, col }));
            }
        }
        Node::Left => {
            for col in 0..ac {
                pattern.toggle(geom.qubit_id(Qubit::Horizontal { row: ar, col }));
            }
            pattern.toggle(geom.qubit_id(Qubit::LeftBoundary { row: ar }));
        }
        Node::Right => {
            for col in ac..geom.l() - 2 {
                pattern.toggle(geom.qubit_id(Qubit::Horizontal { row: ar, col }));
            }
            pattern.toggle(geom.qubit_id(Qubit::RightBoundary { row: ar }));
        }
    }
    Ok(pattern)
}

/// Parity of the pattern's crossings of the left boundary cut.
///
/// For a syndrome-free pattern every vertical cut has the same crossing
/// parity, so this single cut decides the homology class.
pub fn left_crossing_parity(geom: &CodeGeometry, pattern: &ErrorPattern) -> bool {
    assert_eq!(pattern.num_qubits(), geom.num_qubits());
    let mut parity = false;
    for row in 0..geom.l() {
        parity ^= pattern.contains(geom.qubit_id(Qubit::LeftBoundary { row }));
    }
    parity
}

/// Whether a fully corrected residual is a logical error.
///
/// The residual must have an empty syndrome (it is `error XOR
/// correction` after a successful decode); it is a logical failure
/// exactly when it crosses the lattice an odd number of times, measured
/// at the left boundary cut.
pub fn is_logical_failure(geom: &CodeGeometry, residual: &ErrorPattern) -> Result<bool> {
    if !syndrome_of(geom, residual).is_empty() {
        return Err(Error::NontrivialSyndrome);
    }
    Ok(left_crossing_parity(geom, residual))
}
