//! Declarations of a parsed input file.

use logres_core::canext::TauSection;
use logres_core::cohomology::KoszulOperator;
use logres_core::germ::{RatFunc, RatMatrix};
use logres_core::lpk::LogOperator;
use logres_core::strata::Splitting;
use logres_core::{Matrix, Scalar};

pub type IntVec = Vec<i64>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub declarations: Vec<Declaration>,
}

impl Document {
    pub fn get(&self, name: &str) -> Option<&Declaration> {
        self.declarations.iter().find(|d| d.name == name)
    }

    pub fn of_kind(&self, kind: Kind) -> impl Iterator<Item = &Declaration> {
        self.declarations.iter().filter(move |d| d.item.kind() == kind)
    }

    /// Appends the declarations of `other`, which was parsed in the context of `self`.
    pub fn extend(&mut self, other: Document) {
        self.declarations.extend(other.declarations);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Monoid,
    Ideal,
    Tau,
    Splitting,
    Connection,
    LObject,
    Embedding,
    Germ,
    GermMap,
    Family,
    LocalSystem,
}

impl Kind {
    pub const ALL: [Kind; 11] = [
        Kind::Monoid,
        Kind::Ideal,
        Kind::Tau,
        Kind::Splitting,
        Kind::Connection,
        Kind::LObject,
        Kind::Embedding,
        Kind::Germ,
        Kind::GermMap,
        Kind::Family,
        Kind::LocalSystem,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Monoid => "monoid",
            Kind::Ideal => "ideal",
            Kind::Tau => "tau",
            Kind::Splitting => "splitting",
            Kind::Connection => "connection",
            Kind::LObject => "lobject",
            Kind::Embedding => "embedding",
            Kind::Germ => "germ",
            Kind::GermMap => "germmap",
            Kind::Family => "family",
            Kind::LocalSystem => "locsys",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub name: String,
    pub item: Item,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    /// Product of factors, in order.
    Monoid(Vec<MonoidFactor>),
    Ideal(IdealDecl),
    Tau(TauSection),
    Splitting(SplittingDecl),
    Connection(ConnectionDecl),
    LObject(LObjectDecl),
    Embedding(EmbeddingDecl),
    Germ(RatMatrix),
    GermMap(GermMapDecl),
    Family(Vec<KoszulOperator>),
    LocalSystem(LocalSystemDecl),
}

impl Item {
    pub fn kind(&self) -> Kind {
        match self {
            Item::Monoid(_) => Kind::Monoid,
            Item::Ideal(_) => Kind::Ideal,
            Item::Tau(_) => Kind::Tau,
            Item::Splitting(_) => Kind::Splitting,
            Item::Connection(_) => Kind::Connection,
            Item::LObject(_) => Kind::LObject,
            Item::Embedding(_) => Kind::Embedding,
            Item::Germ(_) => Kind::Germ,
            Item::GermMap(_) => Kind::GermMap,
            Item::Family(_) => Kind::Family,
            Item::LocalSystem(_) => Kind::LocalSystem,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonoidFactor {
    Literal(Vec<IntVec>),
    Named(String),
    /// `N^k`
    Free(usize),
    /// `Z^k`
    Lattice(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealDecl {
    pub monoid: String,
    /// `None` stands for the maximal ideal.
    pub generators: Option<Vec<IntVec>>,
}

/// `(P,K)` or `(P)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelRef {
    pub monoid: String,
    pub ideal: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingDecl {
    pub model: ModelRef,
    pub spec: SplittingSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplittingSpec {
    Universal,
    Obvious,
    Explicit(Splitting),
}

/// `coefficient · x^exponent`; no exponent means a constant term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coefficient: Matrix,
    pub exponent: Option<IntVec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionDecl {
    pub model: ModelRef,
    /// Terms of the matrix `U_k` for each basis direction.
    pub directions: Vec<Vec<Term>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub degree: Vec<Scalar>,
    pub dim: usize,
    pub monodromy: Vec<LogOperator>,
}

/// Generator `index` inside a named class or block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenRef {
    pub class: String,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingDecl {
    pub direction: usize,
    pub from: GenRef,
    pub to: GenRef,
    pub coefficient: Scalar,
    pub exponent: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LObjectDecl {
    pub model: ModelRef,
    pub classes: Vec<ClassDecl>,
    pub couplings: Vec<CouplingDecl>,
    pub frame: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingDecl {
    pub model: ModelRef,
    pub infinity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GermMapDecl {
    pub monoid: String,
    pub face: Vec<usize>,
    pub values: Vec<RatFunc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecl {
    pub name: String,
    pub labels: Vec<Scalar>,
    pub nilpotents: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCouplingDecl {
    pub direction: usize,
    pub from: GenRef,
    pub to: GenRef,
    pub coefficient: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSystemDecl {
    pub directions: usize,
    pub blocks: Vec<BlockDecl>,
    pub couplings: Vec<LocalCouplingDecl>,
}
