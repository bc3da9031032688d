//! Builds library objects from declarations.

use logres_core::canext::{GoodEmbeddingModel, TauSection};
use logres_core::cohomology::{KoszulInput, KoszulOperator, LocalBlock, LocalCoupling, LocalSystem};
use logres_core::germ::{DiffModuleGerm, GermMap};
use logres_core::lpk::{Coupling, GeneratorClass, LObject};
use logres_core::rh::{LogDifferentials, MonomialMatrix};
use logres_core::strata::{hollow_layout, Splitting};
use logres_core::{AffineMonoid, LogConnection, MonoidIdeal};

use crate::document::*;
use crate::error::CliError;

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

/// A document together with the options that affect how it is interpreted.
pub struct Workspace {
    pub doc: Document,
    /// Membership search bound applied to every monoid.
    pub bound: Option<i64>,
}

impl Workspace {
    fn item(&self, name: &str, kind: Kind) -> Result<&Item, CliError> {
        match self.doc.get(name) {
            Some(d) if d.item.kind() == kind => Ok(&d.item),
            _ => Err(CliError::Missing(format!("{} `{name}`", kind.keyword()))),
        }
    }

    pub fn monoid(&self, name: &str) -> Result<AffineMonoid, CliError> {
        let Item::Monoid(factors) = self.item(name, Kind::Monoid)? else {
            unreachable!("kind checked")
        };
        let mut acc: Option<AffineMonoid> = None;
        for f in factors {
            let next = match f {
                MonoidFactor::Literal(g) => AffineMonoid::new(g[0].len(), g.clone()).map_err(domain)?,
                MonoidFactor::Named(n) => self.monoid(n)?,
                MonoidFactor::Free(k) => AffineMonoid::free(*k),
                MonoidFactor::Lattice(k) => AffineMonoid::lattice_group(*k),
            };
            acc = Some(match acc {
                Some(a) => a.product(&next),
                None => next,
            });
        }
        let m = acc.expect("parser requires a factor");
        Ok(match self.bound {
            Some(b) => m.with_search_bound(b),
            None => m,
        })
    }

    pub fn ideal(&self, name: &str) -> Result<(AffineMonoid, MonoidIdeal), CliError> {
        let Item::Ideal(decl) = self.item(name, Kind::Ideal)? else {
            unreachable!("kind checked")
        };
        let p = self.monoid(&decl.monoid)?;
        let k = match &decl.generators {
            Some(g) => MonoidIdeal::new(&p, g.clone()).map_err(domain)?,
            None => MonoidIdeal::maximal(&p),
        };
        Ok((p, k))
    }

    pub fn model(&self, m: &ModelRef) -> Result<(AffineMonoid, MonoidIdeal), CliError> {
        match &m.ideal {
            Some(k) => self.ideal(k),
            None => Ok((self.monoid(&m.monoid)?, MonoidIdeal::empty())),
        }
    }

    pub fn tau(&self, name: &str) -> Result<TauSection, CliError> {
        let Item::Tau(t) = self.item(name, Kind::Tau)? else {
            unreachable!("kind checked")
        };
        Ok(t.clone())
    }

    pub fn splitting(&self, name: &str) -> Result<Splitting, CliError> {
        let Item::Splitting(decl) = self.item(name, Kind::Splitting)? else {
            unreachable!("kind checked")
        };
        let (p, k) = self.model(&decl.model)?;
        let layout = hollow_layout(&p, &k).map_err(domain)?;
        let eps = match &decl.spec {
            SplittingSpec::Universal => Splitting::universal(&layout),
            SplittingSpec::Obvious => Splitting::obvious(&layout),
            SplittingSpec::Explicit(e) => e.clone(),
        };
        eps.validate(&layout).map_err(domain)?;
        Ok(eps)
    }

    pub fn connection(&self, name: &str) -> Result<LogConnection, CliError> {
        let Item::Connection(decl) = self.item(name, Kind::Connection)? else {
            unreachable!("kind checked")
        };
        let (p, k) = self.model(&decl.model)?;
        let d = p.ambient_rank();
        let rank = decl.directions.first().and_then(|t| t.first()).map_or(0, |t| t.coefficient.rows());
        let omega = decl
            .directions
            .iter()
            .map(|terms| {
                terms.iter().fold(MonomialMatrix::zero(rank), |acc, t| {
                    let term = match &t.exponent {
                        Some(e) => MonomialMatrix::monomial(e.clone(), t.coefficient.clone()),
                        None => MonomialMatrix::constant_in(d, t.coefficient.clone()),
                    };
                    acc.add(&term)
                })
            })
            .collect();
        let differentials = LogDifferentials::new(p, k).map_err(domain)?;
        LogConnection::new(differentials, rank, omega).map_err(domain)
    }

    pub fn lobject(&self, name: &str) -> Result<LObject, CliError> {
        let Item::LObject(decl) = self.item(name, Kind::LObject)? else {
            unreachable!("kind checked")
        };
        let (monoid, ideal) = self.model(&decl.model)?;
        let offsets: Vec<(String, usize)> = decl
            .classes
            .iter()
            .scan(0, |acc, c| {
                let start = *acc;
                *acc += c.dim;
                Some((c.name.clone(), start))
            })
            .collect();
        let global = |r: &GenRef| {
            offsets.iter().find(|(n, _)| *n == r.class).map(|(_, o)| o + r.index).expect("parser checked")
        };
        let classes: Vec<GeneratorClass> = decl
            .classes
            .iter()
            .map(|c| GeneratorClass {
                degree: c.degree.clone(),
                dim: c.dim,
                monodromy: c.monodromy.clone(),
            })
            .collect();
        let couplings = decl
            .couplings
            .iter()
            .map(|c| Coupling {
                direction: c.direction,
                from: global(&c.from),
                to: global(&c.to),
                coefficient: c.coefficient.clone(),
                exponent: c.exponent.clone(),
            })
            .collect();
        let mut v = LObject::new(monoid, ideal, classes, couplings);
        if let Some(f) = &decl.frame {
            v.frame = f.clone();
        }
        Ok(v)
    }

    pub fn embedding(&self, name: &str) -> Result<GoodEmbeddingModel, CliError> {
        let Item::Embedding(decl) = self.item(name, Kind::Embedding)? else {
            unreachable!("kind checked")
        };
        let (p, k) = self.model(&decl.model)?;
        Ok(GoodEmbeddingModel::new(p, k, decl.infinity))
    }

    pub fn germ(&self, name: &str) -> Result<DiffModuleGerm, CliError> {
        let Item::Germ(m) = self.item(name, Kind::Germ)? else {
            unreachable!("kind checked")
        };
        DiffModuleGerm::new(m.clone()).map_err(domain)
    }

    pub fn germ_map(&self, name: &str) -> Result<(AffineMonoid, GermMap), CliError> {
        let Item::GermMap(decl) = self.item(name, Kind::GermMap)? else {
            unreachable!("kind checked")
        };
        let p = self.monoid(&decl.monoid)?;
        let face = p
            .face_by_indices(&decl.face)
            .cloned()
            .ok_or_else(|| CliError::Domain(format!("{:?} is not a face of {}", decl.face, decl.monoid)))?;
        let map = GermMap {
            target_face: face,
            values: decl.values.clone(),
        };
        Ok((p, map))
    }

    pub fn family(&self, name: &str) -> Result<KoszulInput, CliError> {
        let Item::Family(ops) = self.item(name, Kind::Family)? else {
            unreachable!("kind checked")
        };
        let dimension = match &ops[0] {
            KoszulOperator::Exact(m) => m.rows(),
            KoszulOperator::Log { nilpotent, .. } => nilpotent.rows(),
        };
        Ok(KoszulInput {
            dimension,
            operators: ops.clone(),
        })
    }

    pub fn local_system(&self, name: &str) -> Result<LocalSystem, CliError> {
        let Item::LocalSystem(decl) = self.item(name, Kind::LocalSystem)? else {
            unreachable!("kind checked")
        };
        let offsets: Vec<(String, usize)> = decl
            .blocks
            .iter()
            .scan(0, |acc, b| {
                let start = *acc;
                *acc += b.nilpotents[0].rows();
                Some((b.name.clone(), start))
            })
            .collect();
        let global = |r: &GenRef| {
            offsets.iter().find(|(n, _)| *n == r.class).map(|(_, o)| o + r.index).expect("parser checked")
        };
        Ok(LocalSystem {
            directions: decl.directions,
            blocks: decl
                .blocks
                .iter()
                .map(|b| LocalBlock {
                    labels: b.labels.clone(),
                    nilpotents: b.nilpotents.clone(),
                })
                .collect(),
            couplings: decl
                .couplings
                .iter()
                .map(|c| LocalCoupling {
                    direction: c.direction,
                    from: global(&c.from),
                    to: global(&c.to),
                    coefficient: c.coefficient.clone(),
                })
                .collect(),
        })
    }
}

