//! Variables of the expression engine.
//!
//! A [`Var`] packs its kind and indices into a single `u64` whose natural
//! ordering is the canonical coordinate ordering: base coordinates first, then
//! fiber coordinates by field, derivative order and lexicographic multi-index,
//! then parameters, opaque atoms and finally the homotopy parameter `t`.

use std::fmt;

use super::multi_index::{MultiIndex, MAX_JET_ORDER};

const KIND_SHIFT: u32 = 60;
const ID_SHIFT: u32 = 52;
const LEN_SHIFT: u32 = 48;

const KIND_BASE: u64 = 0;
const KIND_FIBER: u64 = 1;
const KIND_PARAM: u64 = 2;
const KIND_ATOM: u64 = 3;
const KIND_T: u64 = 4;

/// Index of a scalar field `y^σ` in the chart.
pub type FieldId = usize;
/// Index of a registered opaque symbol in the chart.
pub type SymbolId = usize;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u64);

/// Decoded view of a [`Var`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Base(usize),
    Fiber(FieldId, MultiIndex),
    Param(usize),
    /// Opaque atom; see [`Var::atom_indices`] for its index list.
    Atom(SymbolId),
    HomotopyT,
}

/// A coordinate of the jet chart: `x^i` or `y^σ_J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JetCoordinate {
    Base(usize),
    Fiber(FieldId, MultiIndex),
}

fn pack_indices(m: &MultiIndex) -> u64 {
    let mut bits = 0u64;
    for (k, &e) in m.raw_entries().iter().enumerate() {
        bits |= (e as u64 & 0xf) << (4 * (MAX_JET_ORDER - 1 - k));
    }
    bits | ((m.len() as u64) << LEN_SHIFT)
}

fn unpack_indices(bits: u64) -> MultiIndex {
    let len = ((bits >> LEN_SHIFT) & 0xf) as usize;
    let idx: Vec<usize> = (0..len)
        .map(|k| ((bits >> (4 * (MAX_JET_ORDER - 1 - k))) & 0xf) as usize)
        .collect();
    MultiIndex::new(&idx)
}

impl Var {
    pub fn base(i: usize) -> Var {
        Var((KIND_BASE << KIND_SHIFT) | i as u64)
    }

    pub fn fiber(field: FieldId, index: MultiIndex) -> Var {
        assert!(field < 256, "too many fields");
        Var((KIND_FIBER << KIND_SHIFT) | ((field as u64) << ID_SHIFT) | pack_indices(&index))
    }

    pub fn field(field: FieldId) -> Var {
        Var::fiber(field, MultiIndex::EMPTY)
    }

    pub fn param(id: usize) -> Var {
        Var((KIND_PARAM << KIND_SHIFT) | id as u64)
    }

    /// Opaque atom; indices are stored as given (sorted by the caller when the
    /// symbol is symmetric).
    pub fn atom(symbol: SymbolId, indices: &[usize]) -> Var {
        assert!(symbol < 256, "too many opaque symbols");
        assert!(indices.len() <= MAX_JET_ORDER, "too many atom indices");
        let mut packed = (indices.len() as u64) << LEN_SHIFT;
        for (k, &e) in indices.iter().enumerate() {
            packed |= (e as u64 & 0xf) << (4 * (MAX_JET_ORDER - 1 - k));
        }
        Var((KIND_ATOM << KIND_SHIFT) | ((symbol as u64) << ID_SHIFT) | packed)
    }

    pub fn homotopy_t() -> Var {
        Var(KIND_T << KIND_SHIFT)
    }

    pub fn kind(&self) -> VarKind {
        let k = self.0 >> KIND_SHIFT;
        let id = ((self.0 >> ID_SHIFT) & 0xff) as usize;
        match k {
            KIND_BASE => VarKind::Base((self.0 & 0xffff) as usize),
            KIND_FIBER => VarKind::Fiber(id, unpack_indices(self.0)),
            KIND_PARAM => VarKind::Param((self.0 & 0xffff_ffff) as usize),
            KIND_ATOM => VarKind::Atom(id),
            _ => VarKind::HomotopyT,
        }
    }

    /// Indices of an opaque atom in their stored order.
    pub fn atom_indices(&self) -> Vec<usize> {
        let len = ((self.0 >> LEN_SHIFT) & 0xf) as usize;
        (0..len)
            .map(|k| ((self.0 >> (4 * (MAX_JET_ORDER - 1 - k))) & 0xf) as usize)
            .collect()
    }

    pub fn atom_symbol(&self) -> Option<SymbolId> {
        match self.0 >> KIND_SHIFT {
            KIND_ATOM => Some(((self.0 >> ID_SHIFT) & 0xff) as usize),
            _ => None,
        }
    }

    pub fn is_base(&self) -> bool {
        self.0 >> KIND_SHIFT == KIND_BASE
    }

    pub fn is_fiber(&self) -> bool {
        self.0 >> KIND_SHIFT == KIND_FIBER
    }

    pub fn is_param(&self) -> bool {
        self.0 >> KIND_SHIFT == KIND_PARAM
    }

    pub fn is_atom(&self) -> bool {
        self.0 >> KIND_SHIFT == KIND_ATOM
    }

    pub fn is_t(&self) -> bool {
        self.0 >> KIND_SHIFT == KIND_T
    }

    /// Field and multi-index of a fiber coordinate.
    pub fn as_fiber(&self) -> Option<(FieldId, MultiIndex)> {
        match self.kind() {
            VarKind::Fiber(f, j) => Some((f, j)),
            _ => None,
        }
    }

    pub fn as_base(&self) -> Option<usize> {
        match self.kind() {
            VarKind::Base(i) => Some(i),
            _ => None,
        }
    }

    /// Jet order: `|J|` for fiber coordinates, 0 otherwise.
    pub fn jet_order(&self) -> usize {
        if self.is_fiber() {
            ((self.0 >> LEN_SHIFT) & 0xf) as usize
        } else {
            0
        }
    }

    pub fn raw(&self) -> u64 {
        self.0
    }
}

impl From<JetCoordinate> for Var {
    fn from(c: JetCoordinate) -> Var {
        match c {
            JetCoordinate::Base(i) => Var::base(i),
            JetCoordinate::Fiber(f, j) => Var::fiber(f, j),
        }
    }
}

impl JetCoordinate {
    pub fn from_var(v: Var) -> Option<JetCoordinate> {
        match v.kind() {
            VarKind::Base(i) => Some(JetCoordinate::Base(i)),
            VarKind::Fiber(f, j) => Some(JetCoordinate::Fiber(f, j)),
            _ => None,
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            VarKind::Base(i) => write!(f, "x{i}"),
            VarKind::Fiber(s, j) if j.is_empty() => write!(f, "y{s}"),
            VarKind::Fiber(s, j) => write!(f, "y{s}_{{{j}}}"),
            VarKind::Param(p) => write!(f, "p{p}"),
            VarKind::Atom(s) => write!(f, "a{s}{:?}", self.atom_indices()),
            VarKind::HomotopyT => write!(f, "t"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_kinds() {
        let j = MultiIndex::new(&[3, 0, 2]);
        assert_eq!(Var::fiber(5, j).kind(), VarKind::Fiber(5, j));
        assert_eq!(Var::base(3).kind(), VarKind::Base(3));
        assert_eq!(Var::param(7).kind(), VarKind::Param(7));
        assert_eq!(Var::atom(2, &[1, 0]).atom_indices(), vec![1, 0]);
        assert_eq!(Var::homotopy_t().kind(), VarKind::HomotopyT);
    }

    #[test]
    fn canonical_ordering() {
        let y = |f, j: &[usize]| Var::fiber(f, MultiIndex::new(j));
        assert!(Var::base(3) < y(0, &[]));
        assert!(y(0, &[3, 3]) < y(1, &[]));
        assert!(y(0, &[3]) < y(0, &[0, 0]));
        assert!(y(0, &[0, 1]) < y(0, &[0, 2]));
        assert!(y(7, &[1]) < Var::param(0));
        assert!(Var::param(9) < Var::atom(0, &[]));
        assert!(Var::atom(3, &[3, 3]) < Var::homotopy_t());
    }

    #[test]
    fn jet_order_reads_length() {
        assert_eq!(Var::fiber(0, MultiIndex::new(&[1, 2, 3])).jet_order(), 3);
        assert_eq!(Var::base(1).jet_order(), 0);
    }
}
