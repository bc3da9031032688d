//! Recursive-descent parser for the declaration format.

use std::collections::HashMap;

use logres_core::canext::TauSection;
use logres_core::cohomology::KoszulOperator;
use logres_core::exact::{DenseMatrix, Field};
use logres_core::germ::{RatFunc, RatMatrix};
use logres_core::lpk::LogOperator;
use logres_core::strata::Splitting;
use logres_core::{Matrix, Scalar};
use thiserror::Error;

use crate::document::*;
use crate::lexer::{tokenize, Spanned, Tok};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

/// Parses a standalone document.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    parse_with(text, &Document::default())
}

/// Parses `text`, letting references resolve against the declarations of `context`.
pub fn parse_with(text: &str, context: &Document) -> Result<Document, ParseError> {
    let toks = tokenize(text, 1, 1).map_err(|e| ParseError {
        line: e.line,
        col: e.col,
        expected: vec!["a token".into()],
        found: e.found,
    })?;
    let mut p = Parser {
        toks,
        pos: 0,
        symbols: HashMap::new(),
    };
    for d in &context.declarations {
        let sym = p.symbol_of(&d.item);
        p.symbols.insert(d.name.clone(), sym);
    }
    p.document()
}

#[derive(Clone, Debug)]
struct Symbol {
    kind: Kind,
    /// Ambient rank for monoids.
    rank: usize,
    /// Owning monoid for ideals.
    monoid: Option<String>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    symbols: HashMap<String, Symbol>,
}

type PResult<T> = Result<T, ParseError>;

fn ordinal_suffix(ident: &str, prefix: &str) -> Option<usize> {
    let rest = ident.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, at: &Spanned, expected: &[&str]) -> ParseError {
        ParseError {
            line: at.line,
            col: at.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: at.tok.to_string(),
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        self.error_at(self.peek(), expected)
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn punct(&mut self, c: char) -> PResult<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn usize(&mut self) -> PResult<usize> {
        match &self.peek().tok {
            Tok::Int(s) => match s.parse() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => Err(self.error(&["a small integer"])),
            },
            _ => Err(self.error(&["an integer"])),
        }
    }

    fn i64(&mut self) -> PResult<i64> {
        let negative = self.eat_punct('-');
        let at = self.peek().clone();
        let v = self.usize()?;
        let v = i64::try_from(v).map_err(|_| self.error_at(&at, &["a small integer"]))?;
        Ok(if negative { -v } else { v })
    }

    fn sep(&mut self) {
        while self.eat_punct(';') {}
    }

    fn symbol(&self, name: &str, kind: Kind, at: &Spanned) -> PResult<&Symbol> {
        match self.symbols.get(name) {
            Some(s) if s.kind == kind => Ok(s),
            _ => Err(self.error_at(at, &[&format!("a declared {}", kind.keyword())])),
        }
    }

    fn symbol_of(&self, item: &Item) -> Symbol {
        let rank = match item {
            Item::Monoid(factors) => factors.iter().map(|f| self.factor_rank(f)).sum(),
            _ => 0,
        };
        let monoid = match item {
            Item::Ideal(i) => Some(i.monoid.clone()),
            _ => None,
        };
        Symbol {
            kind: item.kind(),
            rank,
            monoid,
        }
    }

    fn factor_rank(&self, f: &MonoidFactor) -> usize {
        match f {
            MonoidFactor::Literal(v) => v[0].len(),
            MonoidFactor::Named(n) => self.symbols.get(n).map_or(0, |s| s.rank),
            MonoidFactor::Free(k) | MonoidFactor::Lattice(k) => *k,
        }
    }

    fn document(&mut self) -> PResult<Document> {
        let mut doc = Document::default();
        loop {
            self.sep();
            if self.peek().tok == Tok::Eof {
                return Ok(doc);
            }
            let at = self.peek().clone();
            let kind = match &at.tok {
                Tok::Ident(s) => Kind::from_keyword(s),
                _ => None,
            };
            let Some(kind) = kind else {
                let all: Vec<&str> = Kind::ALL.iter().map(|k| k.keyword()).collect();
                return Err(self.error(&all));
            };
            self.bump();
            let name_at = self.peek().clone();
            let name = self.ident("a name")?;
            if self.symbols.contains_key(&name) {
                return Err(self.error_at(&name_at, &["a fresh name"]));
            }
            let item = match kind {
                Kind::Monoid => self.monoid()?,
                Kind::Ideal => self.ideal()?,
                Kind::Tau => self.tau()?,
                Kind::Splitting => self.splitting()?,
                Kind::Connection => self.connection()?,
                Kind::LObject => self.lobject()?,
                Kind::Embedding => self.embedding()?,
                Kind::Germ => self.germ()?,
                Kind::GermMap => self.germmap()?,
                Kind::Family => self.family()?,
                Kind::LocalSystem => self.locsys()?,
            };
            let sym = self.symbol_of(&item);
            self.symbols.insert(name.clone(), sym);
            doc.declarations.push(Declaration { name, item });
        }
    }

    // ---- shared pieces ----

    fn int_vec(&mut self) -> PResult<IntVec> {
        self.punct('[')?;
        let mut v = Vec::new();
        if !self.eat_punct(']') {
            loop {
                v.push(self.i64()?);
                if self.eat_punct(']') {
                    break;
                }
                if !self.eat_punct(',') {
                    return Err(self.error(&["`,`", "`]`"]));
                }
            }
        }
        Ok(v)
    }

    /// A list of integer vectors of common length `len` (or any common length).
    fn int_vecs(&mut self, len: Option<usize>) -> PResult<Vec<IntVec>> {
        self.punct('[')?;
        let mut out: Vec<IntVec> = Vec::new();
        if self.eat_punct(']') {
            return Ok(out);
        }
        loop {
            let at = self.peek().clone();
            let v = self.int_vec()?;
            let want = len.or(out.first().map(Vec::len));
            if let Some(n) = want {
                if v.len() != n {
                    return Err(self.error_at(&at, &[&format!("a vector of length {n}")]));
                }
            }
            out.push(v);
            if self.eat_punct(']') {
                return Ok(out);
            }
            if !self.eat_punct(',') {
                return Err(self.error(&["`,`", "`]`"]));
            }
        }
    }

    /// Expression in `t` and `i`, either bare or inside a string literal.
    fn expr(&mut self) -> PResult<RatFunc> {
        if let Tok::Str(s) = &self.peek().tok {
            let s = s.clone();
            let at = self.bump();
            let toks = tokenize(&s, at.line, at.col + 1).map_err(|e| ParseError {
                line: e.line,
                col: e.col,
                expected: vec!["an expression".into()],
                found: e.found,
            })?;
            let mut sub = Expr { toks: &toks, pos: 0 };
            let v = sub.expr()?;
            if sub.toks[sub.pos].tok != Tok::Eof {
                return Err(sub.error(&["end of expression"]));
            }
            return Ok(v);
        }
        let mut sub = Expr {
            toks: &self.toks[self.pos..],
            pos: 0,
        };
        let v = sub.expr()?;
        self.pos += sub.pos;
        Ok(v)
    }

    fn scalar(&mut self) -> PResult<Scalar> {
        let at = self.peek().clone();
        let f = self.expr()?;
        if !f.is_constant() {
            return Err(self.error_at(&at, &["a constant"]));
        }
        Ok(f.value_at_zero().unwrap_or_else(Scalar::zero))
    }

    fn scalar_vec(&mut self, len: Option<usize>) -> PResult<Vec<Scalar>> {
        let at = self.peek().clone();
        let v = self.list(|p| p.scalar())?;
        match len {
            Some(n) if v.len() != n => Err(self.error_at(&at, &[&format!("a list of length {n}")])),
            _ => Ok(v),
        }
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.punct('[')?;
        let mut out = Vec::new();
        if self.eat_punct(']') {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_punct(']') {
                return Ok(out);
            }
            if !self.eat_punct(',') {
                return Err(self.error(&["`,`", "`]`"]));
            }
        }
    }

    fn grid<F: Field>(&mut self, mut entry: impl FnMut(&mut Self) -> PResult<F>) -> PResult<DenseMatrix<F>> {
        let at = self.peek().clone();
        let rows = self.list(|p| p.list(&mut entry))?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(self.error_at(&at, &["a nonempty rectangular matrix"]));
        }
        DenseMatrix::from_rows(rows).map_err(|_| self.error_at(&at, &["a rectangular matrix"]))
    }

    /// Square scalar matrix, of size `n` when given.
    fn matrix(&mut self, n: Option<usize>) -> PResult<Matrix> {
        let at = self.peek().clone();
        let m = self.grid(|p| p.scalar())?;
        let n = n.unwrap_or(m.rows());
        if m.rows() != n || m.cols() != n {
            return Err(self.error_at(&at, &[&format!("a {n}x{n} matrix")]));
        }
        Ok(m)
    }

    fn model(&mut self) -> PResult<(ModelRef, usize)> {
        self.punct('(')?;
        let at = self.peek().clone();
        let monoid = self.ident("a monoid name")?;
        let rank = self.symbol(&monoid, Kind::Monoid, &at)?.rank;
        let ideal = if self.eat_punct(',') {
            let at = self.peek().clone();
            let k = self.ident("an ideal name")?;
            let sym = self.symbol(&k, Kind::Ideal, &at)?;
            if sym.monoid.as_deref() != Some(monoid.as_str()) {
                return Err(self.error_at(&at, &[&format!("an ideal in {monoid}")]));
            }
            Some(k)
        } else {
            None
        };
        self.punct(')')?;
        Ok((ModelRef { monoid, ideal }, rank))
    }

    fn direction(&mut self, prefix: &str, d: usize) -> PResult<usize> {
        let at = self.peek().clone();
        let what = format!("`{prefix}1`..`{prefix}{d}`");
        let name = self.ident(&what)?;
        match ordinal_suffix(&name, prefix) {
            Some(k) if (1..=d).contains(&k) => Ok(k - 1),
            _ => Err(self.error_at(&at, &[&what])),
        }
    }

    // ---- declarations ----

    fn monoid(&mut self) -> PResult<Item> {
        self.punct('=')?;
        let mut factors = Vec::new();
        loop {
            let at = self.peek().clone();
            let factor = match &at.tok {
                Tok::Punct('[') => {
                    let gens = self.int_vecs(None)?;
                    if gens.is_empty() || gens[0].is_empty() {
                        return Err(self.error_at(&at, &["a nonempty generator list"]));
                    }
                    MonoidFactor::Literal(gens)
                }
                Tok::Ident(s) if (s == "N" || s == "Z") && *self.peek_at(1) == Tok::Punct('^') => {
                    let free = s == "N";
                    self.bump();
                    self.bump();
                    let k = self.usize()?;
                    if free {
                        MonoidFactor::Free(k)
                    } else {
                        MonoidFactor::Lattice(k)
                    }
                }
                Tok::Ident(s) => {
                    let s = s.clone();
                    self.symbol(&s, Kind::Monoid, &at)?;
                    self.bump();
                    MonoidFactor::Named(s)
                }
                _ => return Err(self.error(&["a generator list", "`N^k`", "`Z^k`", "a monoid name"])),
            };
            factors.push(factor);
            if !self.eat_punct('*') {
                return Ok(Item::Monoid(factors));
            }
        }
    }

    fn ideal(&mut self) -> PResult<Item> {
        self.keyword("in")?;
        let at = self.peek().clone();
        let monoid = self.ident("a monoid name")?;
        let rank = self.symbol(&monoid, Kind::Monoid, &at)?.rank;
        self.punct('=')?;
        let generators = if self.is_keyword("maximal") {
            self.bump();
            None
        } else {
            Some(self.int_vecs(Some(rank))?)
        };
        Ok(Item::Ideal(IdealDecl { monoid, generators }))
    }

    fn tau(&mut self) -> PResult<Item> {
        self.punct('=')?;
        self.keyword("window")?;
        self.punct('(')?;
        let at = self.peek().clone();
        let lo = self.scalar()?;
        self.punct(',')?;
        let hi = self.scalar()?;
        self.punct(']')?;
        if !lo.is_real() || hi != &lo + &Scalar::one() {
            return Err(self.error_at(&at, &["a real window of length one"]));
        }
        Ok(Item::Tau(TauSection::new(lo.re)))
    }

    fn splitting(&mut self) -> PResult<Item> {
        self.keyword("over")?;
        let (model, _) = self.model()?;
        self.punct('=')?;
        let spec = if self.is_keyword("universal") {
            self.bump();
            SplittingSpec::Universal
        } else if self.is_keyword("obvious") {
            self.bump();
            SplittingSpec::Obvious
        } else if self.eat_punct('{') {
            self.sep();
            self.keyword("torus")?;
            self.punct('=')?;
            let torus_rank = self.usize()?;
            self.sep();
            self.keyword("monomial")?;
            self.punct('=')?;
            let monomial_part = self.int_vecs(Some(torus_rank))?;
            self.sep();
            self.keyword("units")?;
            self.punct('=')?;
            let unit_part = self.scalar_vec(Some(monomial_part.len()))?;
            self.sep();
            self.punct('}')?;
            SplittingSpec::Explicit(Splitting {
                torus_rank,
                monomial_part,
                unit_part,
            })
        } else {
            return Err(self.error(&["`universal`", "`obvious`", "`{`"]));
        };
        Ok(Item::Splitting(SplittingDecl { model, spec }))
    }

    fn connection(&mut self) -> PResult<Item> {
        self.keyword("over")?;
        let (model, d) = self.model()?;
        self.punct('{')?;
        let mut directions = Vec::new();
        let mut size = None;
        for k in 0..d {
            self.sep();
            let at = self.peek().clone();
            let idx = self.direction("U", d)?;
            if idx != k {
                return Err(self.error_at(&at, &[&format!("`U{}`", k + 1)]));
            }
            self.punct('=')?;
            let mut terms = Vec::new();
            loop {
                let coefficient = self.matrix(size)?;
                size = Some(coefficient.rows());
                let exponent = if self.eat_punct('*') {
                    self.keyword("x")?;
                    self.punct('^')?;
                    let at = self.peek().clone();
                    let e = self.int_vec()?;
                    if e.len() != d {
                        return Err(self.error_at(&at, &[&format!("an exponent of length {d}")]));
                    }
                    Some(e)
                } else {
                    None
                };
                terms.push(Term { coefficient, exponent });
                if !self.eat_punct('+') {
                    break;
                }
            }
            directions.push(terms);
        }
        self.sep();
        self.punct('}')?;
        Ok(Item::Connection(ConnectionDecl { model, directions }))
    }

    fn lobject(&mut self) -> PResult<Item> {
        self.keyword("over")?;
        let (model, d) = self.model()?;
        self.punct('{')?;
        let mut classes: Vec<ClassDecl> = Vec::new();
        let mut gammas: Vec<Vec<Option<LogOperator>>> = Vec::new();
        let mut pending: Vec<(Spanned, usize, GenRefRaw, GenRefRaw, Scalar, IntVec)> = Vec::new();
        let mut frame = None;
        loop {
            self.sep();
            if self.eat_punct('}') {
                break;
            }
            let at = self.peek().clone();
            match &at.tok {
                Tok::Ident(s) if s == "gen" => {
                    self.bump();
                    let name_at = self.peek().clone();
                    let name = self.ident("a generator name")?;
                    if classes.iter().any(|c| c.name == name) {
                        return Err(self.error_at(&name_at, &["a fresh generator name"]));
                    }
                    self.punct(':')?;
                    self.keyword("deg")?;
                    self.punct('=')?;
                    let degree = self.scalar_vec(Some(d))?;
                    let dim = if self.is_keyword("dim") {
                        self.bump();
                        self.punct('=')?;
                        let at = self.peek().clone();
                        let n = self.usize()?;
                        if n == 0 {
                            return Err(self.error_at(&at, &["a positive dimension"]));
                        }
                        n
                    } else {
                        1
                    };
                    classes.push(ClassDecl {
                        name,
                        degree,
                        dim,
                        monodromy: Vec::new(),
                    });
                    gammas.push(vec![None; d]);
                }
                Tok::Ident(s) if ordinal_suffix(s, "gamma").is_some() => {
                    let k = self.direction("gamma", d)?;
                    let Some(last) = classes.last() else {
                        return Err(self.error_at(&at, &["`gen`"]));
                    };
                    let dim = last.dim;
                    if gammas.last().expect("parallel")[k].is_some() {
                        return Err(self.error_at(&at, &["a direction not yet given"]));
                    }
                    self.punct(':')?;
                    self.keyword("label")?;
                    self.punct('=')?;
                    let label = self.scalar()?;
                    self.keyword("nilpotent")?;
                    self.punct('=')?;
                    let nilpotent = self.matrix(Some(dim))?;
                    gammas.last_mut().expect("parallel")[k] = Some(LogOperator { label, nilpotent });
                }
                Tok::Ident(s) if s == "couple" => {
                    self.bump();
                    let direction = self.direction("gamma", d)?;
                    self.punct(':')?;
                    let from = self.raw_gen_ref()?;
                    if self.peek().tok != Tok::Arrow {
                        return Err(self.error(&["`->`"]));
                    }
                    self.bump();
                    let to = self.raw_gen_ref()?;
                    self.keyword("coeff")?;
                    self.punct('=')?;
                    let coefficient = self.scalar()?;
                    let exponent = if self.is_keyword("x") {
                        self.bump();
                        self.punct('^')?;
                        let at = self.peek().clone();
                        let e = self.int_vec()?;
                        if e.len() != d {
                            return Err(self.error_at(&at, &[&format!("an exponent of length {d}")]));
                        }
                        e
                    } else {
                        vec![0; d]
                    };
                    pending.push((at, direction, from, to, coefficient, exponent));
                }
                Tok::Ident(s) if s == "frame" => {
                    self.bump();
                    self.punct('=')?;
                    let n: usize = classes.iter().map(|c| c.dim).sum();
                    frame = Some(self.matrix(Some(n))?);
                }
                _ => return Err(self.error(&["`gen`", "`gammaK`", "`couple`", "`frame`", "`}`"])),
            }
        }
        for (class, ops) in classes.iter_mut().zip(gammas) {
            class.monodromy = ops
                .into_iter()
                .enumerate()
                .map(|(k, op)| {
                    op.unwrap_or_else(|| LogOperator {
                        label: class.degree[k].clone(),
                        nilpotent: Matrix::zeros(class.dim, class.dim),
                    })
                })
                .collect();
        }
        let dims: Vec<(String, usize)> = classes.iter().map(|c| (c.name.clone(), c.dim)).collect();
        let couplings = pending
            .into_iter()
            .map(|(_, direction, from, to, coefficient, exponent)| {
                Ok(CouplingDecl {
                    direction,
                    from: self.check_gen_ref(from, &dims)?,
                    to: self.check_gen_ref(to, &dims)?,
                    coefficient,
                    exponent,
                })
            })
            .collect::<PResult<Vec<_>>>()?;
        Ok(Item::LObject(LObjectDecl {
            model,
            classes,
            couplings,
            frame,
        }))
    }

    fn raw_gen_ref(&mut self) -> PResult<GenRefRaw> {
        let at = self.peek().clone();
        let class = self.ident("a generator name")?;
        let index = if self.eat_punct('.') { self.usize()? } else { 0 };
        Ok(GenRefRaw { at, class, index })
    }

    fn check_gen_ref(&self, r: GenRefRaw, dims: &[(String, usize)]) -> PResult<GenRef> {
        match dims.iter().find(|(n, _)| *n == r.class) {
            Some((_, dim)) if r.index < *dim => Ok(GenRef {
                class: r.class,
                index: r.index,
            }),
            _ => Err(self.error_at(&r.at, &["a declared generator"])),
        }
    }

    fn embedding(&mut self) -> PResult<Item> {
        self.punct('=')?;
        let (model, _) = self.model()?;
        self.keyword("infinity")?;
        let infinity = self.usize()?;
        Ok(Item::Embedding(EmbeddingDecl { model, infinity }))
    }

    fn germ(&mut self) -> PResult<Item> {
        self.punct('=')?;
        let at = self.peek().clone();
        let m: RatMatrix = self.grid(|p| p.expr())?;
        if m.rows() != m.cols() {
            return Err(self.error_at(&at, &["a square matrix"]));
        }
        Ok(Item::Germ(m))
    }

    fn germmap(&mut self) -> PResult<Item> {
        self.keyword("for")?;
        let at = self.peek().clone();
        let monoid = self.ident("a monoid name")?;
        let d = self.symbol(&monoid, Kind::Monoid, &at)?.rank;
        self.keyword("face")?;
        let at = self.peek().clone();
        let face = self.int_vec()?;
        if face.iter().any(|&i| i < 0) {
            return Err(self.error_at(&at, &["generator indices"]));
        }
        let face = face.into_iter().map(|i| i as usize).collect();
        self.punct('=')?;
        let at = self.peek().clone();
        let values = self.list(|p| p.expr())?;
        if values.len() != d {
            return Err(self.error_at(&at, &[&format!("{d} coordinate values")]));
        }
        Ok(Item::GermMap(GermMapDecl { monoid, face, values }))
    }

    fn family(&mut self) -> PResult<Item> {
        self.punct('=')?;
        let at = self.peek().clone();
        let mut size = None;
        let ops = self.list(|p| {
            let op = if p.is_keyword("log") {
                p.bump();
                p.punct('(')?;
                let label = p.scalar()?;
                p.punct(',')?;
                let nilpotent = p.matrix(size)?;
                p.punct(')')?;
                size = Some(nilpotent.rows());
                KoszulOperator::Log { label, nilpotent }
            } else {
                let m = p.matrix(size)?;
                size = Some(m.rows());
                KoszulOperator::Exact(m)
            };
            Ok(op)
        })?;
        if ops.is_empty() {
            return Err(self.error_at(&at, &["at least one operator"]));
        }
        Ok(Item::Family(ops))
    }

    fn locsys(&mut self) -> PResult<Item> {
        self.keyword("on")?;
        let at = self.peek().clone();
        if !self.is_keyword("Z") {
            return Err(self.error_at(&at, &["`Z^r`"]));
        }
        self.bump();
        self.punct('^')?;
        let d = self.usize()?;
        self.punct('{')?;
        let mut blocks: Vec<BlockDecl> = Vec::new();
        let mut pending = Vec::new();
        loop {
            self.sep();
            if self.eat_punct('}') {
                break;
            }
            let at = self.peek().clone();
            if self.is_keyword("block") {
                self.bump();
                let name_at = self.peek().clone();
                let name = self.ident("a block name")?;
                if blocks.iter().any(|b| b.name == name) {
                    return Err(self.error_at(&name_at, &["a fresh block name"]));
                }
                self.punct(':')?;
                self.keyword("labels")?;
                self.punct('=')?;
                let labels = self.scalar_vec(Some(d))?;
                self.keyword("nilpotent")?;
                self.punct('=')?;
                let list_at = self.peek().clone();
                let mut size = None;
                let nilpotents = self.list(|p| {
                    let m = p.matrix(size)?;
                    size = Some(m.rows());
                    Ok(m)
                })?;
                if nilpotents.len() != d {
                    return Err(self.error_at(&list_at, &[&format!("{d} matrices")]));
                }
                blocks.push(BlockDecl {
                    name,
                    labels,
                    nilpotents,
                });
            } else if self.is_keyword("couple") {
                self.bump();
                let direction = self.direction("gamma", d)?;
                self.punct(':')?;
                let from = self.raw_gen_ref()?;
                if self.peek().tok != Tok::Arrow {
                    return Err(self.error(&["`->`"]));
                }
                self.bump();
                let to = self.raw_gen_ref()?;
                self.keyword("coeff")?;
                self.punct('=')?;
                let coefficient = self.scalar()?;
                pending.push((direction, from, to, coefficient));
            } else {
                return Err(self.error_at(&at, &["`block`", "`couple`", "`}`"]));
            }
        }
        let dims: Vec<(String, usize)> = blocks.iter().map(|b| (b.name.clone(), b.nilpotents[0].rows())).collect();
        let couplings = pending
            .into_iter()
            .map(|(direction, from, to, coefficient)| {
                Ok(LocalCouplingDecl {
                    direction,
                    from: self.check_gen_ref(from, &dims)?,
                    to: self.check_gen_ref(to, &dims)?,
                    coefficient,
                })
            })
            .collect::<PResult<Vec<_>>>()?;
        Ok(Item::LocalSystem(LocalSystemDecl {
            directions: d,
            blocks,
            couplings,
        }))
    }
}

struct GenRefRaw {
    at: Spanned,
    class: String,
    index: usize,
}

/// Expression parser over a token slice; stops at the first token that cannot continue.
struct Expr<'a> {
    toks: &'a [Spanned],
    pos: usize,
}

const MAX_EXPONENT: usize = 4096;

impl Expr<'_> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let at = self.peek();
        ParseError {
            line: at.line,
            col: at.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: at.tok.to_string(),
        }
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn bump(&mut self) {
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> PResult<RatFunc> {
        let mut acc = if self.at_punct('+') {
            self.bump();
            self.term()?
        } else {
            self.term()?
        };
        loop {
            if self.at_punct('+') {
                self.bump();
                acc = acc.add(&self.term()?);
            } else if self.at_punct('-') {
                self.bump();
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<RatFunc> {
        let mut acc = self.unary()?;
        loop {
            if self.at_punct('*') {
                self.bump();
                acc = acc.mul(&self.unary()?);
            } else if self.at_punct('/') {
                self.bump();
                let rhs_err = self.error(&["a nonzero divisor"]);
                let rhs = self.unary()?;
                acc = acc.mul(&rhs.inv().ok_or(rhs_err)?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> PResult<RatFunc> {
        if self.at_punct('-') {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> PResult<RatFunc> {
        let base = self.atom()?;
        if !self.at_punct('^') {
            return Ok(base);
        }
        self.bump();
        let negative = self.at_punct('-');
        if negative {
            self.bump();
        }
        let err = self.error(&["a small exponent"]);
        let e = match &self.peek().tok {
            Tok::Int(s) => s.parse::<usize>().ok().filter(|&e| e <= MAX_EXPONENT).ok_or(err.clone())?,
            _ => return Err(self.error(&["an integer exponent"])),
        };
        self.bump();
        let e = if negative { -(e as i64) } else { e as i64 };
        base.pow(e).ok_or(ParseError {
            expected: vec!["a nonzero base".into()],
            ..err
        })
    }

    fn atom(&mut self) -> PResult<RatFunc> {
        match &self.peek().tok {
            Tok::Int(s) => {
                let c: Scalar = s.parse().map_err(|_| self.error(&["a number"]))?;
                self.bump();
                Ok(RatFunc::constant(c))
            }
            Tok::Ident(s) if s == "t" => {
                self.bump();
                Ok(RatFunc::t())
            }
            Tok::Ident(s) if s == "i" => {
                self.bump();
                Ok(RatFunc::constant(Scalar::i()))
            }
            Tok::Punct('(') => {
                self.bump();
                let v = self.expr()?;
                if !self.at_punct(')') {
                    return Err(self.error(&["`)`"]));
                }
                self.bump();
                Ok(v)
            }
            _ => Err(self.error(&["a number", "`t`", "`i`", "`(`"])),
        }
    }
}
