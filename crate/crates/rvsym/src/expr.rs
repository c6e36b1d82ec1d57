//! Width-annotated bit-vector expression trees.
//!
//! This is the shared vocabulary for instruction arithmetic: the ISA
//! semantics build these trees, the concrete evaluator folds them to
//! numbers and the solver adapter lowers them to SMT terms. Expressions
//! are polymorphic over the leaf type `V` so the same tree shape can
//! carry machine words, binding slots or solver handles.

use std::fmt;

use thiserror::Error;

/// Bit width of an expression, between 1 and 64 bits.
///
/// Register-level RV32 expressions are always 32 bits wide; 64-bit
/// widths only appear as intermediate products of the MULH family.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Width(u8);

impl Width {
    pub const W1: Width = Width(1);
    pub const W8: Width = Width(8);
    pub const W16: Width = Width(16);
    pub const W32: Width = Width(32);
    pub const W64: Width = Width(64);

    pub const MAX_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Width, ExprError> {
        if bits == 0 || bits > Self::MAX_BITS {
            return Err(ExprError::BadWidth { bits });
        }
        Ok(Width(bits as u8))
    }

    pub fn bits(self) -> u32 {
        u32::from(self.0)
    }

    /// Bit mask covering exactly this width.
    pub fn mask(self) -> u64 {
        if self.0 == 64 {
            u64::MAX
        } else {
            (1u64 << self.0) - 1
        }
    }

    fn extend(self, extra: u32) -> Result<Width, ExprError> {
        Width::new(self.bits() + extra)
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary operators, covering RV32IM arithmetic plus the comparison
/// forms used by branch conditions.
///
/// Comparisons evaluate to 0 or 1 at the width of their operands, so a
/// SLT result can be written straight back to a register.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BinOp {
    Add,
    Sub,
    And,
    Or,
    Xor,
    Sll,
    Srl,
    Sra,
    Mul,
    MulhSS,
    MulhUU,
    MulhSU,
    DivS,
    DivU,
    RemS,
    RemU,
    Eq,
    Neq,
    SltS,
    SgeS,
    SltU,
    SgeU,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Neq | BinOp::SltS | BinOp::SgeS | BinOp::SltU | BinOp::SgeU
        )
    }
}

/// A bit-vector expression over leaf values of type `V`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BvExpr<V> {
    /// An opaque leaf value; its width is supplied externally.
    Leaf(V),
    /// Constant of the given width. The literal must fit the width.
    FromInt(Width, u64),
    /// Zero extension by `extra` bits.
    ZExt { extra: u8, inner: Box<BvExpr<V>> },
    /// Sign extension by `extra` bits.
    SExt { extra: u8, inner: Box<BvExpr<V>> },
    /// Bit slice `[low, low + width)` of the inner expression.
    Extract {
        low: u8,
        width: Width,
        inner: Box<BvExpr<V>>,
    },
    /// Binary operator node; both children must have equal width.
    Bin(BinOp, Box<BvExpr<V>>, Box<BvExpr<V>>),
}

/// Expression construction or evaluation failure.
#[derive(Error, Clone, PartialEq, Eq, Debug)]
pub enum ExprError {
    #[error("width must be between 1 and 64 bits, got {bits}")]
    BadWidth { bits: u32 },
    #[error("operand widths disagree: {lhs} vs {rhs}")]
    WidthMismatch { lhs: Width, rhs: Width },
    #[error("extract [{low}, {low}+{width}) out of range for width {inner}")]
    ExtractOutOfRange { low: u32, width: Width, inner: Width },
    #[error("literal {literal:#x} does not fit in {width} bits")]
    LiteralTooWide { literal: u64, width: Width },
}

// Builder methods named after the operators they wrap; `add` and
// `sub` consume self by value, unlike their trait namesakes.
#[allow(clippy::should_implement_trait)]
impl<V> BvExpr<V> {
    pub fn leaf(v: V) -> Self {
        BvExpr::Leaf(v)
    }

    /// Constant expression; the literal is masked to the width.
    pub fn int(width: Width, literal: u64) -> Self {
        BvExpr::FromInt(width, literal & width.mask())
    }

    pub fn zext(self, extra: u32) -> Self {
        BvExpr::ZExt {
            extra: extra as u8,
            inner: Box::new(self),
        }
    }

    pub fn sext(self, extra: u32) -> Self {
        BvExpr::SExt {
            extra: extra as u8,
            inner: Box::new(self),
        }
    }

    pub fn extract(self, low: u32, width: Width) -> Self {
        BvExpr::Extract {
            low: low as u8,
            width,
            inner: Box::new(self),
        }
    }

    pub fn bin(op: BinOp, lhs: Self, rhs: Self) -> Self {
        BvExpr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn add(self, rhs: Self) -> Self {
        Self::bin(BinOp::Add, self, rhs)
    }
    pub fn sub(self, rhs: Self) -> Self {
        Self::bin(BinOp::Sub, self, rhs)
    }
    pub fn and(self, rhs: Self) -> Self {
        Self::bin(BinOp::And, self, rhs)
    }
    pub fn or(self, rhs: Self) -> Self {
        Self::bin(BinOp::Or, self, rhs)
    }
    pub fn xor(self, rhs: Self) -> Self {
        Self::bin(BinOp::Xor, self, rhs)
    }
    pub fn sll(self, rhs: Self) -> Self {
        Self::bin(BinOp::Sll, self, rhs)
    }
    pub fn srl(self, rhs: Self) -> Self {
        Self::bin(BinOp::Srl, self, rhs)
    }
    pub fn sra(self, rhs: Self) -> Self {
        Self::bin(BinOp::Sra, self, rhs)
    }
    pub fn eq(self, rhs: Self) -> Self {
        Self::bin(BinOp::Eq, self, rhs)
    }
    pub fn neq(self, rhs: Self) -> Self {
        Self::bin(BinOp::Neq, self, rhs)
    }
    pub fn slt_s(self, rhs: Self) -> Self {
        Self::bin(BinOp::SltS, self, rhs)
    }
    pub fn slt_u(self, rhs: Self) -> Self {
        Self::bin(BinOp::SltU, self, rhs)
    }

    /// Rebuild the tree with every leaf replaced by a subexpression.
    pub fn map_leaves<U>(&self, f: &mut impl FnMut(&V) -> BvExpr<U>) -> BvExpr<U> {
        match self {
            BvExpr::Leaf(v) => f(v),
            BvExpr::FromInt(w, lit) => BvExpr::FromInt(*w, *lit),
            BvExpr::ZExt { extra, inner } => BvExpr::ZExt {
                extra: *extra,
                inner: Box::new(inner.map_leaves(f)),
            },
            BvExpr::SExt { extra, inner } => BvExpr::SExt {
                extra: *extra,
                inner: Box::new(inner.map_leaves(f)),
            },
            BvExpr::Extract { low, width, inner } => BvExpr::Extract {
                low: *low,
                width: *width,
                inner: Box::new(inner.map_leaves(f)),
            },
            BvExpr::Bin(op, lhs, rhs) => {
                BvExpr::bin(*op, lhs.map_leaves(f), rhs.map_leaves(f))
            }
        }
    }

    pub fn any_leaf(&self, pred: &mut impl FnMut(&V) -> bool) -> bool {
        match self {
            BvExpr::Leaf(v) => pred(v),
            BvExpr::FromInt(..) => false,
            BvExpr::ZExt { inner, .. }
            | BvExpr::SExt { inner, .. }
            | BvExpr::Extract { inner, .. } => inner.any_leaf(pred),
            BvExpr::Bin(_, lhs, rhs) => lhs.any_leaf(pred) || rhs.any_leaf(pred),
        }
    }
}

impl<V: fmt::Display> fmt::Display for BvExpr<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BvExpr::Leaf(v) => write!(f, "{v}"),
            BvExpr::FromInt(w, lit) => write!(f, "{lit:#x}:{w}"),
            BvExpr::ZExt { extra, inner } => write!(f, "zext{extra}({inner})"),
            BvExpr::SExt { extra, inner } => write!(f, "sext{extra}({inner})"),
            BvExpr::Extract { low, width, inner } => {
                write!(f, "{inner}[{}:{low}]", u32::from(*low) + width.bits() - 1)
            }
            BvExpr::Bin(op, lhs, rhs) => write!(f, "{op:?}({lhs}, {rhs})"),
        }
    }
}

/// Result width of a well-formed expression.
///
/// `leaf_width` supplies the width of leaf values. Fails with a
/// malformed-expression error if child widths disagree, an extract is
/// out of range, an extension exceeds 64 bits or a literal overflows
/// its declared width.
pub fn width_of<V>(
    e: &BvExpr<V>,
    leaf_width: &impl Fn(&V) -> Width,
) -> Result<Width, ExprError> {
    match e {
        BvExpr::Leaf(v) => Ok(leaf_width(v)),
        BvExpr::FromInt(w, lit) => {
            if *lit & !w.mask() != 0 {
                return Err(ExprError::LiteralTooWide {
                    literal: *lit,
                    width: *w,
                });
            }
            Ok(*w)
        }
        BvExpr::ZExt { extra, inner } | BvExpr::SExt { extra, inner } => {
            width_of(inner, leaf_width)?.extend(u32::from(*extra))
        }
        BvExpr::Extract { low, width, inner } => {
            let iw = width_of(inner, leaf_width)?;
            if u32::from(*low) + width.bits() > iw.bits() {
                return Err(ExprError::ExtractOutOfRange {
                    low: u32::from(*low),
                    width: *width,
                    inner: iw,
                });
            }
            Ok(*width)
        }
        BvExpr::Bin(_, lhs, rhs) => {
            let lw = width_of(lhs, leaf_width)?;
            let rw = width_of(rhs, leaf_width)?;
            if lw != rw {
                return Err(ExprError::WidthMismatch { lhs: lw, rhs: rw });
            }
            Ok(lw)
        }
    }
}

/// Sign-extend a `width`-bit value held in a u64 to a full i64.
pub(crate) fn to_signed(value: u64, width: Width) -> i64 {
    let shift = 64 - width.bits();
    ((value << shift) as i64) >> shift
}

/// Apply a binary operator to two `width`-bit operands.
///
/// Implements modular 2^width arithmetic. Shifts consume the full
/// right-hand value (amounts at or beyond the width drain to zero, or
/// to the sign bit for arithmetic shifts). Division follows the
/// non-trapping RISC-V convention: x/0 = all-ones (unsigned) or -1
/// (signed), x%0 = x, and MIN/-1 wraps to MIN with remainder 0.
/// Comparisons yield 0 or 1 at operand width.
pub fn apply_bin(op: BinOp, width: Width, a: u64, b: u64) -> u64 {
    let m = width.mask();
    let bits = u64::from(width.bits());
    debug_assert!(a <= m && b <= m);
    match op {
        BinOp::Add => a.wrapping_add(b) & m,
        BinOp::Sub => a.wrapping_sub(b) & m,
        BinOp::And => a & b,
        BinOp::Or => a | b,
        BinOp::Xor => a ^ b,
        BinOp::Sll => {
            if b >= bits {
                0
            } else {
                (a << b) & m
            }
        }
        BinOp::Srl => {
            if b >= bits {
                0
            } else {
                a >> b
            }
        }
        BinOp::Sra => {
            let sa = to_signed(a, width);
            (sa >> b.min(63)) as u64 & m
        }
        BinOp::Mul => a.wrapping_mul(b) & m,
        BinOp::MulhUU => ((u128::from(a) * u128::from(b)) >> bits) as u64 & m,
        BinOp::MulhSS => {
            let p = i128::from(to_signed(a, width)) * i128::from(to_signed(b, width));
            (p >> bits) as u64 & m
        }
        BinOp::MulhSU => {
            let p = i128::from(to_signed(a, width)) * i128::from(b);
            (p >> bits) as u64 & m
        }
        BinOp::DivU => a.checked_div(b).unwrap_or(m),
        BinOp::RemU => a.checked_rem(b).unwrap_or(a),
        BinOp::DivS => {
            let (sa, sb) = (to_signed(a, width), to_signed(b, width));
            let min = (-(1i128 << (bits - 1))) as i64;
            if sb == 0 {
                m
            } else if sa == min && sb == -1 {
                a
            } else {
                (sa / sb) as u64 & m
            }
        }
        BinOp::RemS => {
            let (sa, sb) = (to_signed(a, width), to_signed(b, width));
            let min = (-(1i128 << (bits - 1))) as i64;
            if sb == 0 {
                a
            } else if sa == min && sb == -1 {
                0
            } else {
                (sa % sb) as u64 & m
            }
        }
        BinOp::Eq => u64::from(a == b),
        BinOp::Neq => u64::from(a != b),
        BinOp::SltU => u64::from(a < b),
        BinOp::SgeU => u64::from(a >= b),
        BinOp::SltS => u64::from(to_signed(a, width) < to_signed(b, width)),
        BinOp::SgeS => u64::from(to_signed(a, width) >= to_signed(b, width)),
    }
}

/// Evaluate an expression given a per-leaf value and width.
pub fn eval_with<V>(
    e: &BvExpr<V>,
    leaf: &impl Fn(&V) -> (u64, Width),
) -> Result<(u64, Width), ExprError> {
    match e {
        BvExpr::Leaf(v) => {
            let (value, width) = leaf(v);
            Ok((value & width.mask(), width))
        }
        BvExpr::FromInt(w, lit) => {
            if *lit & !w.mask() != 0 {
                return Err(ExprError::LiteralTooWide {
                    literal: *lit,
                    width: *w,
                });
            }
            Ok((*lit, *w))
        }
        BvExpr::ZExt { extra, inner } => {
            let (v, w) = eval_with(inner, leaf)?;
            Ok((v, w.extend(u32::from(*extra))?))
        }
        BvExpr::SExt { extra, inner } => {
            let (v, w) = eval_with(inner, leaf)?;
            let nw = w.extend(u32::from(*extra))?;
            Ok((to_signed(v, w) as u64 & nw.mask(), nw))
        }
        BvExpr::Extract { low, width, inner } => {
            let (v, iw) = eval_with(inner, leaf)?;
            if u32::from(*low) + width.bits() > iw.bits() {
                return Err(ExprError::ExtractOutOfRange {
                    low: u32::from(*low),
                    width: *width,
                    inner: iw,
                });
            }
            Ok(((v >> low) & width.mask(), *width))
        }
        BvExpr::Bin(op, lhs, rhs) => {
            let (a, lw) = eval_with(lhs, leaf)?;
            let (b, rw) = eval_with(rhs, leaf)?;
            if lw != rw {
                return Err(ExprError::WidthMismatch { lhs: lw, rhs: rw });
            }
            Ok((apply_bin(*op, lw, a, b), lw))
        }
    }
}

/// Evaluate an expression whose leaves are concrete 32-bit words.
///
/// The result is truncated to the expression's width.
pub fn eval_concrete(e: &BvExpr<u32>) -> Result<u64, ExprError> {
    eval_with(e, &|v| (u64::from(*v), Width::W32)).map(|(v, _)| v)
}
