//! Command dispatch and report assembly.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use logres_core::canext::{canonical_extension, exponents_report, restrict, TauSection};
use logres_core::cohomology::{
    comparison_report, is_tau_adapted, koszul_cohomology, local_system_round_trip, torus_de_rham,
};
use logres_core::germ::{germ_tensor, is_fuchsian, pullback_germ};
use logres_core::monoid::classify_model;
use logres_core::rh::{is_normal_form, RhError};
use logres_core::strata::{hollow_layout, Splitting};
use logres_core::{
    from_lobject, higgs_decompose, is_flat, strata_decomposition, to_lobject, AffineMonoid, LogConnection,
    MonoidIdeal, StratumDescriptor,
};

use crate::document::{Document, Item, Kind};
use crate::error::CliError;
use crate::parser::parse_with;
use crate::resolve::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Faces,
    Strata,
    Classify,
    Flat,
    Higgs,
    RhToLObject,
    RhFromLObject,
    CanextExtend,
    CanextRestrict,
    CanextExponents,
    GermFuchs,
    GermPullback,
    GermTensor,
    CohomologyKoszul,
    CohomologyDeRham,
    CohomologyCompare,
    LocsysRoundtrip,
}

/// Whether a role must be filled or may fall back to a default.
#[derive(Clone, Copy)]
enum Need {
    Required,
    Optional,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Faces => "faces",
            Command::Strata => "strata",
            Command::Classify => "classify",
            Command::Flat => "flat",
            Command::Higgs => "higgs",
            Command::RhToLObject => "rh to-lobject",
            Command::RhFromLObject => "rh from-lobject",
            Command::CanextExtend => "canext extend",
            Command::CanextRestrict => "canext restrict",
            Command::CanextExponents => "canext exponents",
            Command::GermFuchs => "germ fuchs",
            Command::GermPullback => "germ pullback",
            Command::GermTensor => "germ tensor",
            Command::CohomologyKoszul => "cohomology koszul",
            Command::CohomologyDeRham => "cohomology derham",
            Command::CohomologyCompare => "cohomology compare",
            Command::LocsysRoundtrip => "locsys roundtrip",
        }
    }

    fn roles(self) -> &'static [(Kind, Need)] {
        use Kind::*;
        use Need::*;
        match self {
            Command::Faces => &[(Monoid, Required)],
            Command::Strata | Command::Classify => &[(Monoid, Required), (Ideal, Optional)],
            Command::Flat | Command::RhToLObject => &[(Connection, Required)],
            Command::Higgs | Command::CohomologyDeRham | Command::CohomologyCompare => {
                &[(Connection, Required), (Splitting, Optional), (Tau, Optional)]
            }
            Command::RhFromLObject => &[(LObject, Required), (Tau, Optional)],
            Command::CanextExtend | Command::CanextRestrict | Command::CanextExponents => {
                &[(LObject, Required), (Embedding, Required), (Tau, Optional)]
            }
            Command::GermFuchs => &[(Germ, Required)],
            Command::GermPullback => &[(Connection, Required), (GermMap, Required)],
            Command::GermTensor => &[(Germ, Required), (Germ, Required)],
            Command::CohomologyKoszul => &[(Family, Required)],
            Command::LocsysRoundtrip => &[(LocalSystem, Required), (Monoid, Optional), (Ideal, Optional), (Tau, Optional)],
        }
    }

    fn supports_dot(self) -> bool {
        matches!(self, Command::Faces | Command::Strata)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub json: bool,
    pub dot: bool,
    pub tau_window: Option<String>,
    pub bound: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<String>,
    pub result: Value,
    pub diagnostics: Vec<String>,
}

/// Outcome of a successful command.
#[derive(Clone, Debug)]
pub struct Output {
    pub report: Report,
    pub dot: Option<String>,
}

impl Output {
    /// Text written to stdout.
    pub fn render(&self, options: &Options) -> String {
        if let (true, Some(dot)) = (options.dot, &self.dot) {
            return dot.clone();
        }
        let value = if options.json {
            serde_json::to_value(&self.report).expect("reports serialize")
        } else {
            self.report.result.clone()
        };
        let mut text = serde_json::to_string_pretty(&canonical(value)).expect("values serialize");
        text.push('\n');
        text
    }
}

/// Recursively sorts object keys.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonical(v))).collect::<Map<_, _>>())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

fn to_json(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn looks_like_path(arg: &str) -> bool {
    arg.contains('/') || arg.contains('.')
}

/// Reads and parses every file argument into one document; returns it with the name arguments.
pub fn load(inputs: &[String]) -> Result<(Document, Vec<String>), CliError> {
    if inputs.is_empty() {
        return Err(CliError::Usage("missing input file".into()));
    }
    let mut doc = Document::default();
    let mut names = Vec::new();
    for (i, arg) in inputs.iter().enumerate() {
        if i > 0 && !looks_like_path(arg) {
            names.push(arg.clone());
            continue;
        }
        let path = Path::new(arg);
        if !path.exists() {
            return Err(CliError::FileNotFound(arg.clone()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: arg.clone(),
            message: e.to_string(),
        })?;
        let part = parse_with(&text, &doc).map_err(|error| CliError::Parse {
            file: arg.clone(),
            error,
        })?;
        doc.extend(part);
    }
    Ok((doc, names))
}

/// Assigns explicit names to roles by kind, in order; unfilled roles take the first
/// declaration of their kind not already used.
fn assign(command: Command, doc: &Document, names: &[String]) -> Result<Vec<Option<String>>, CliError> {
    let mut unused: Vec<(String, Kind)> = names
        .iter()
        .map(|n| {
            doc.get(n)
                .map(|d| (n.clone(), d.item.kind()))
                .ok_or_else(|| CliError::Missing(format!("declaration `{n}`")))
        })
        .collect::<Result<_, _>>()?;
    let mut out: Vec<Option<String>> = Vec::new();
    let roles = command.roles();
    for &(kind, _) in roles {
        let explicit = unused.iter().position(|(_, k)| *k == kind).map(|i| unused.remove(i).0);
        out.push(explicit);
    }
    if let Some((n, k)) = unused.first() {
        return Err(CliError::Usage(format!(
            "`{n}` is a {} but `{}` takes no further {}",
            k.keyword(),
            command.name(),
            k.keyword()
        )));
    }
    for (i, &(kind, need)) in roles.iter().enumerate() {
        if out[i].is_some() {
            continue;
        }
        // Only the window falls back to a declaration; other optional roles have fixed defaults.
        if matches!(need, Need::Optional) && kind != Kind::Tau {
            continue;
        }
        let taken: Vec<&String> = out.iter().flatten().collect();
        let first = doc.of_kind(kind).map(|d| &d.name).find(|n| !taken.contains(n)).cloned();
        if first.is_none() && matches!(need, Need::Required) {
            return Err(CliError::Missing(kind.keyword().to_string()));
        }
        out[i] = first;
    }
    Ok(out)
}

struct Context {
    ws: Workspace,
    roles: Vec<Option<String>>,
    diagnostics: Vec<String>,
}

impl Context {
    fn name(&self, i: usize) -> &str {
        self.roles[i].as_deref().expect("required role is filled")
    }

    fn tau(&mut self, options: &Options, i: usize) -> Result<TauSection, CliError> {
        let tau = match (&options.tau_window, &self.roles[i]) {
            (Some(w), _) => w.parse().map_err(domain)?,
            (None, Some(name)) => self.ws.tau(name)?,
            (None, None) => TauSection::default(),
        };
        self.diagnostics.push(format!("tau window {tau}"));
        Ok(tau)
    }

    /// The named ideal, or the first ideal declared in `monoid`, or the empty ideal.
    fn ideal_for(&self, monoid: &str, i: usize) -> Result<(AffineMonoid, MonoidIdeal), CliError> {
        let explicit = self.roles[i].clone();
        let implicit = || {
            self.ws.doc.declarations.iter().find_map(|d| match &d.item {
                Item::Ideal(decl) if decl.monoid == monoid => Some(d.name.clone()),
                _ => None,
            })
        };
        match explicit.or_else(implicit) {
            Some(k) => {
                let (p, ideal) = self.ws.ideal(&k)?;
                if p != self.ws.monoid(monoid)? {
                    return Err(CliError::Domain(format!("ideal `{k}` does not live in `{monoid}`")));
                }
                Ok((p, ideal))
            }
            None => Ok((self.ws.monoid(monoid)?, MonoidIdeal::empty())),
        }
    }

    fn splitting_for(&mut self, conn: &LogConnection, i: usize) -> Result<Splitting, CliError> {
        match &self.roles[i] {
            Some(name) => self.ws.splitting(name),
            None => {
                let layout = hollow_layout(conn.monoid(), conn.ideal()).map_err(domain)?;
                self.diagnostics.push("universal splitting".into());
                Ok(Splitting::universal(&layout))
            }
        }
    }
}

/// Runs a command on the given files and names.
pub fn run(command: Command, inputs: &[String], options: &Options) -> Result<Output, CliError> {
    if options.dot && !command.supports_dot() {
        return Err(CliError::Usage(format!("`{}` has no DOT output", command.name())));
    }
    let (doc, names) = load(inputs)?;
    let roles = assign(command, &doc, &names)?;
    let mut cx = Context {
        ws: Workspace {
            doc,
            bound: options.bound,
        },
        roles,
        diagnostics: Vec::new(),
    };
    let mut dot = None;
    let result = match command {
        Command::Faces => {
            let p = cx.ws.monoid(cx.name(0))?;
            dot = Some(p.face_lattice_dot());
            let faces: Vec<Value> = p
                .faces()
                .iter()
                .map(|f| json!({"generators": f.generator_indices, "rank": p.face_rank(f)}))
                .collect();
            json!({"count": faces.len(), "faces": faces})
        }
        Command::Strata => {
            let (p, k) = cx.ideal_for(cx.name(0), 1)?;
            let strata = strata_decomposition(&p, &k);
            dot = Some(strata_dot(&strata));
            to_json(&strata)
        }
        Command::Classify => {
            let (p, k) = cx.ideal_for(cx.name(0), 1)?;
            to_json(classify_model(&p, &k))
        }
        Command::Flat => {
            let conn = cx.ws.connection(cx.name(0))?;
            let d = conn.omega.len();
            let curved: Vec<[usize; 2]> = (0..d)
                .flat_map(|l| (l + 1..d).map(move |k| [l, k]))
                .filter(|&[l, k]| !conn.curvature(l, k).is_zero())
                .collect();
            json!({"flat": is_flat(&conn), "curved_pairs": curved})
        }
        Command::Higgs => {
            let conn = cx.ws.connection(cx.name(0))?;
            let eps = cx.splitting_for(&conn, 1)?;
            match higgs_decompose(&conn, &eps) {
                Ok(data) => json!({"ok": true, "higgs": data}),
                Err(RhError::ConditionsFailed(failed)) => {
                    let idx: Vec<usize> = failed.iter().map(|c| c.index()).collect();
                    json!({"ok": false, "violated": idx, "conditions": failed})
                }
                Err(e) => return Err(domain(e)),
            }
        }
        Command::RhToLObject => {
            let conn = cx.ws.connection(cx.name(0))?;
            let v = to_lobject(&conn).map_err(domain)?;
            json!({"object": v, "normal_form": is_normal_form(&v)})
        }
        Command::RhFromLObject => {
            let v = cx.ws.lobject(cx.name(0))?;
            let tau = cx.tau(options, 1)?;
            let conn = from_lobject(&v).map_err(domain)?;
            let adapted = hollow_layout(&v.monoid, &v.ideal)
                .ok()
                .map(|layout| is_tau_adapted(&v, &layout.sharp, &tau));
            json!({"connection": conn, "tau_adapted": adapted})
        }
        Command::CanextExtend | Command::CanextRestrict | Command::CanextExponents => {
            let v = cx.ws.lobject(cx.name(0))?;
            let model = cx.ws.embedding(cx.name(1))?;
            let tau = cx.tau(options, 2)?;
            match command {
                Command::CanextExtend => to_json(canonical_extension(&model, &v, &tau).map_err(domain)?),
                Command::CanextRestrict => json!({"object": restrict(&model, &v).map_err(domain)?}),
                _ => to_json(exponents_report(&model, &v, &tau)),
            }
        }
        Command::GermFuchs => {
            let g = cx.ws.germ(cx.name(0))?;
            json!({"fuchsian": is_fuchsian(&g).map_err(domain)?})
        }
        Command::GermPullback => {
            let conn = cx.ws.connection(cx.name(0))?;
            let (p, map) = cx.ws.germ_map(cx.name(1))?;
            if p != *conn.monoid() {
                return Err(CliError::Domain("germ map and connection live on different monoids".into()));
            }
            let g = pullback_germ(&conn, &map).map_err(domain)?;
            json!({
                "germ": g.matrix,
                "has_center": map.has_center(&p),
                "fuchsian": is_fuchsian(&g).map_err(domain)?,
            })
        }
        Command::GermTensor => {
            let a = cx.ws.germ(cx.name(0))?;
            let b = cx.ws.germ(cx.name(1))?;
            let g = germ_tensor(&a, &b);
            json!({"germ": g.matrix, "fuchsian": is_fuchsian(&g).map_err(domain)?})
        }
        Command::CohomologyKoszul => {
            let input = cx.ws.family(cx.name(0))?;
            json!({"dims": koszul_cohomology(&input).map_err(domain)?})
        }
        Command::CohomologyDeRham => {
            let conn = cx.ws.connection(cx.name(0))?;
            let eps = cx.splitting_for(&conn, 1)?;
            json!({"dims": torus_de_rham(&conn, &eps).map_err(domain)?})
        }
        Command::CohomologyCompare => {
            let conn = cx.ws.connection(cx.name(0))?;
            let eps = cx.splitting_for(&conn, 1)?;
            let tau = cx.tau(options, 2)?;
            to_json(comparison_report(&conn, &eps, &tau).map_err(domain)?)
        }
        Command::LocsysRoundtrip => {
            let w = cx.ws.local_system(cx.name(0))?;
            let (p, k) = match cx.roles[1].clone() {
                Some(name) => cx.ideal_for(&name, 2)?,
                None => (AffineMonoid::free(w.directions), MonoidIdeal::empty()),
            };
            let tau = cx.tau(options, 3)?;
            to_json(local_system_round_trip(&w, &p, &k, &tau).map_err(domain)?)
        }
    };
    let report = Report {
        command: command.name().to_string(),
        inputs: cx.roles.iter().flatten().cloned().collect(),
        result: canonical(result),
        diagnostics: cx.diagnostics,
    };
    Ok(Output { report, dot })
}

/// Strata ordered by inclusion of their faces.
fn strata_dot(strata: &[StratumDescriptor]) -> String {
    let mut out = String::from("digraph strata {\n");
    for (i, s) in strata.iter().enumerate() {
        let _ = writeln!(
            out,
            "  s{i} [label=\"face {:?}\\ntorus rank {}\\nlog rank {}\"];",
            s.face.generator_indices, s.torus_rank, s.log_rank
        );
    }
    for (i, small) in strata.iter().enumerate() {
        for (j, big) in strata.iter().enumerate() {
            if !small.face.is_strictly_below(&big.face) {
                continue;
            }
            let covered = strata
                .iter()
                .any(|mid| small.face.is_strictly_below(&mid.face) && mid.face.is_strictly_below(&big.face));
            if !covered {
                let _ = writeln!(out, "  s{i} -> s{j};");
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Report emitted with `--json` when a command fails.
pub fn error_report(command: Command, error: &CliError) -> Report {
    Report {
        command: command.name().to_string(),
        inputs: Vec::new(),
        result: Value::Null,
        diagnostics: vec![format!("{}: {error}", error.kind())],
    }
}
