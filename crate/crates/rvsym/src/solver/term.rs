//! Hash-consed solver term graphs.
//!
//! Terms mirror the expression language but live in an arena with
//! structural sharing: interning the same shape twice yields the same
//! handle, so values that fan out across many instructions (every
//! branch condition derived from one input byte, say) stay compact.
//! Handles are cheap copies carrying their width; node indices are
//! topologically ordered (children precede parents), which lets every
//! traversal here run as a linear scan instead of recursion.

use std::collections::{BTreeSet, HashMap};

use crate::expr::{apply_bin, to_signed, BinOp, BvExpr, ExprError, Width};

use super::{Model, VarId};

/// Handle to an interned term; identity is the arena index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct TermHandle {
    id: u32,
    width: Width,
}

impl TermHandle {
    pub fn id(self) -> u32 {
        self.id
    }

    pub fn width(self) -> Width {
        self.width
    }
}

/// One arena node. Child references always point at lower indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    /// A free 8-bit input variable.
    Var(VarId),
    Const { width: Width, value: u64 },
    ZExt { extra: u8, inner: TermHandle },
    SExt { extra: u8, inner: TermHandle },
    Extract { low: u8, width: Width, inner: TermHandle },
    Bin { op: BinOp, lhs: TermHandle, rhs: TermHandle },
}

/// Arena of interned terms.
#[derive(Default, Debug)]
pub struct TermTable {
    nodes: Vec<Term>,
    dedup: HashMap<Term, u32>,
}

impl TermTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, h: TermHandle) -> Term {
        self.nodes[h.id as usize]
    }

    /// Node by raw arena index (as produced by [`Self::cone`]).
    pub fn node(&self, id: u32) -> Term {
        self.nodes[id as usize]
    }

    fn intern(&mut self, term: Term, width: Width) -> TermHandle {
        if let Some(&id) = self.dedup.get(&term) {
            return TermHandle { id, width };
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(term);
        self.dedup.insert(term, id);
        TermHandle { id, width }
    }

    /// Intern an input variable. Variables are always eight bits wide;
    /// interning the same [`VarId`] twice yields the same handle.
    pub fn var(&mut self, id: VarId) -> TermHandle {
        self.intern(Term::Var(id), Width::W8)
    }

    pub fn constant(&mut self, width: Width, value: u64) -> TermHandle {
        let value = value & width.mask();
        self.intern(Term::Const { width, value }, width)
    }

    pub fn zext(&mut self, inner: TermHandle, extra: u32) -> Result<TermHandle, ExprError> {
        let width = Width::new(inner.width.bits() + extra)?;
        if extra == 0 {
            return Ok(inner);
        }
        Ok(self.intern(Term::ZExt { extra: extra as u8, inner }, width))
    }

    pub fn sext(&mut self, inner: TermHandle, extra: u32) -> Result<TermHandle, ExprError> {
        let width = Width::new(inner.width.bits() + extra)?;
        if extra == 0 {
            return Ok(inner);
        }
        Ok(self.intern(Term::SExt { extra: extra as u8, inner }, width))
    }

    pub fn extract(
        &mut self,
        inner: TermHandle,
        low: u32,
        width: Width,
    ) -> Result<TermHandle, ExprError> {
        if low + width.bits() > inner.width.bits() {
            return Err(ExprError::ExtractOutOfRange { low, width, inner: inner.width });
        }
        if low == 0 && width == inner.width {
            return Ok(inner);
        }
        Ok(self.intern(Term::Extract { low: low as u8, width, inner }, width))
    }

    pub fn bin(
        &mut self,
        op: BinOp,
        lhs: TermHandle,
        rhs: TermHandle,
    ) -> Result<TermHandle, ExprError> {
        if lhs.width != rhs.width {
            return Err(ExprError::WidthMismatch { lhs: lhs.width, rhs: rhs.width });
        }
        // Constant operands fold immediately; the interpreter produces
        // plenty of these (immediates combined with concrete state).
        if let (Term::Const { value: a, .. }, Term::Const { value: b, .. }) =
            (self.get(lhs), self.get(rhs))
        {
            let folded = apply_bin(op, lhs.width, a, b);
            return Ok(self.constant(lhs.width, folded));
        }
        Ok(self.intern(Term::Bin { op, lhs, rhs }, lhs.width))
    }

    /// Lower an expression whose leaves are already interned terms.
    pub fn lower(&mut self, e: &BvExpr<TermHandle>) -> Result<TermHandle, ExprError> {
        match e {
            BvExpr::Leaf(h) => Ok(*h),
            BvExpr::FromInt(w, lit) => {
                if *lit & !w.mask() != 0 {
                    return Err(ExprError::LiteralTooWide { literal: *lit, width: *w });
                }
                Ok(self.constant(*w, *lit))
            }
            BvExpr::ZExt { extra, inner } => {
                let inner = self.lower(inner)?;
                self.zext(inner, u32::from(*extra))
            }
            BvExpr::SExt { extra, inner } => {
                let inner = self.lower(inner)?;
                self.sext(inner, u32::from(*extra))
            }
            BvExpr::Extract { low, width, inner } => {
                let inner = self.lower(inner)?;
                self.extract(inner, u32::from(*low), *width)
            }
            BvExpr::Bin(op, lhs, rhs) => {
                let lhs = self.lower(lhs)?;
                let rhs = self.lower(rhs)?;
                self.bin(*op, lhs, rhs)
            }
        }
    }

    /// Node ids reachable from `roots`, in ascending (topological)
    /// order.
    pub fn cone(&self, roots: &[TermHandle]) -> Vec<u32> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<u32> = Vec::new();
        for r in roots {
            if !seen[r.id as usize] {
                seen[r.id as usize] = true;
                stack.push(r.id);
            }
        }
        while let Some(id) = stack.pop() {
            let mut push = |h: TermHandle| {
                if !seen[h.id as usize] {
                    seen[h.id as usize] = true;
                    stack.push(h.id);
                }
            };
            match self.nodes[id as usize] {
                Term::Var(_) | Term::Const { .. } => {}
                Term::ZExt { inner, .. }
                | Term::SExt { inner, .. }
                | Term::Extract { inner, .. } => push(inner),
                Term::Bin { lhs, rhs, .. } => {
                    push(lhs);
                    push(rhs);
                }
            }
        }
        (0..self.nodes.len() as u32).filter(|&i| seen[i as usize]).collect()
    }

    /// Input variables appearing under `roots`.
    pub fn vars_in(&self, roots: &[TermHandle]) -> BTreeSet<VarId> {
        self.cone(roots)
            .into_iter()
            .filter_map(|id| match self.nodes[id as usize] {
                Term::Var(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    /// Evaluate a term under a variable assignment. Variables absent
    /// from the model read as zero.
    pub fn eval(&self, root: TermHandle, model: &Model) -> u64 {
        let cone = self.cone(&[root]);
        let mut values: HashMap<u32, u64> = HashMap::with_capacity(cone.len());
        for id in cone {
            let v = match self.nodes[id as usize] {
                Term::Var(var) => u64::from(model.get(&var).copied().unwrap_or(0)),
                Term::Const { value, .. } => value,
                Term::ZExt { inner, .. } => values[&inner.id],
                Term::SExt { extra, inner } => {
                    let nw = Width::new(inner.width.bits() + u32::from(extra))
                        .expect("interned width");
                    to_signed(values[&inner.id], inner.width) as u64 & nw.mask()
                }
                Term::Extract { low, width, inner } => {
                    (values[&inner.id] >> low) & width.mask()
                }
                Term::Bin { op, lhs, rhs } => {
                    apply_bin(op, lhs.width(), values[&lhs.id], values[&rhs.id])
                }
            };
            values.insert(id, v);
        }
        values[&root.id]
    }

    /// Widths for each node in a cone, recomputed from the leaves. Used
    /// by backends that need per-node widths without handles.
    pub fn node_width(&self, id: u32) -> Width {
        match self.nodes[id as usize] {
            Term::Var(_) => Width::W8,
            Term::Const { width, .. } => width,
            Term::ZExt { extra, inner } | Term::SExt { extra, inner } => {
                Width::new(inner.width.bits() + u32::from(extra)).expect("interned width")
            }
            Term::Extract { width, .. } => width,
            Term::Bin { lhs, .. } => lhs.width,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w32() -> Width {
        Width::W32
    }

    #[test]
    fn interning_shares_structure() {
        let mut t = TermTable::new();
        let v = t.var(VarId { call: 0, offset: 0 });
        let a = t.zext(v, 24).unwrap();
        let c = t.constant(w32(), 7);
        let x = t.bin(BinOp::Add, a, c).unwrap();
        let y = t.bin(BinOp::Add, a, c).unwrap();
        assert_eq!(x, y);
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn constants_fold() {
        let mut t = TermTable::new();
        let a = t.constant(w32(), 10);
        let b = t.constant(w32(), 3);
        let q = t.bin(BinOp::DivU, a, b).unwrap();
        assert_eq!(t.get(q), Term::Const { width: w32(), value: 3 });
        let z = t.constant(w32(), 0);
        let q0 = t.bin(BinOp::DivU, a, z).unwrap();
        assert_eq!(t.get(q0), Term::Const { width: w32(), value: 0xFFFF_FFFF });
    }

    #[test]
    fn eval_matches_expression_semantics() {
        let mut t = TermTable::new();
        let id = VarId { call: 0, offset: 3 };
        let v = t.var(id);
        let w = t.sext(v, 24).unwrap();
        let c = t.constant(w32(), 100);
        let sum = t.bin(BinOp::Add, w, c).unwrap();
        let mut model = Model::new();
        model.insert(id, 0x80);
        // sext(0x80) = -128; -128 + 100 = -28
        assert_eq!(t.eval(sum, &model), 0xFFFF_FFE4);
        assert_eq!(t.eval(sum, &Model::new()), 100);
    }

    #[test]
    fn identity_extensions_collapse() {
        let mut t = TermTable::new();
        let v = t.var(VarId { call: 1, offset: 0 });
        assert_eq!(t.zext(v, 0).unwrap(), v);
        assert_eq!(t.extract(v, 0, Width::W8).unwrap(), v);
    }

    #[test]
    fn cone_is_topological() {
        let mut t = TermTable::new();
        let v = t.var(VarId { call: 0, offset: 0 });
        let a = t.zext(v, 24).unwrap();
        let c = t.constant(w32(), 1);
        let s = t.bin(BinOp::Add, a, c).unwrap();
        let cone = t.cone(&[s]);
        for (i, id) in cone.iter().enumerate() {
            for later in &cone[i + 1..] {
                assert!(later > id);
            }
        }
        assert_eq!(t.vars_in(&[s]).len(), 1);
    }
}
