//! Canonical text form of a document; `parse(&print(d)) == d`.

use std::fmt::Write;

use logres_core::cohomology::KoszulOperator;
use logres_core::exact::{DenseMatrix, Field};
use logres_core::Scalar;

use crate::document::*;

pub fn print(doc: &Document) -> String {
    let mut out = String::new();
    for d in &doc.declarations {
        print_declaration(&mut out, d);
    }
    out
}

fn quoted(s: impl std::fmt::Display) -> String {
    format!("\"{s}\"")
}

fn int_vec(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(i64::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn int_vecs(vs: &[IntVec]) -> String {
    let parts: Vec<String> = vs.iter().map(|v| int_vec(v)).collect();
    format!("[{}]", parts.join(","))
}

fn scalars(v: &[Scalar]) -> String {
    let parts: Vec<String> = v.iter().map(quoted).collect();
    format!("[{}]", parts.join(","))
}

fn grid<F: Field + std::fmt::Display>(m: &DenseMatrix<F>) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let cells: Vec<String> = m.row(i).iter().map(quoted).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

fn model(m: &ModelRef) -> String {
    match &m.ideal {
        Some(k) => format!("({},{k})", m.monoid),
        None => format!("({})", m.monoid),
    }
}

fn gen_ref(r: &GenRef, dims: &[(String, usize)]) -> String {
    let dim = dims.iter().find(|(n, _)| *n == r.class).map_or(1, |(_, d)| *d);
    if dim == 1 && r.index == 0 {
        r.class.clone()
    } else {
        format!("{}.{}", r.class, r.index)
    }
}

fn print_declaration(out: &mut String, d: &Declaration) {
    let name = &d.name;
    match &d.item {
        Item::Monoid(factors) => {
            let parts: Vec<String> = factors
                .iter()
                .map(|f| match f {
                    MonoidFactor::Literal(g) => int_vecs(g),
                    MonoidFactor::Named(n) => n.clone(),
                    MonoidFactor::Free(k) => format!("N^{k}"),
                    MonoidFactor::Lattice(k) => format!("Z^{k}"),
                })
                .collect();
            let _ = writeln!(out, "monoid {name} = {}", parts.join(" * "));
        }
        Item::Ideal(i) => {
            let body = i.generators.as_deref().map_or_else(|| "maximal".to_string(), int_vecs);
            let _ = writeln!(out, "ideal {name} in {} = {body}", i.monoid);
        }
        Item::Tau(t) => {
            let _ = writeln!(out, "tau {name} = window{t}");
        }
        Item::Splitting(s) => {
            let body = match &s.spec {
                SplittingSpec::Universal => "universal".to_string(),
                SplittingSpec::Obvious => "obvious".to_string(),
                SplittingSpec::Explicit(e) => format!(
                    "{{ torus={}; monomial={}; units={} }}",
                    e.torus_rank,
                    int_vecs(&e.monomial_part),
                    scalars(&e.unit_part)
                ),
            };
            let _ = writeln!(out, "splitting {name} over {} = {body}", model(&s.model));
        }
        Item::Connection(c) => {
            let _ = writeln!(out, "connection {name} over {} {{", model(&c.model));
            for (k, terms) in c.directions.iter().enumerate() {
                let parts: Vec<String> = terms
                    .iter()
                    .map(|t| match &t.exponent {
                        Some(e) => format!("{}*x^{}", grid(&t.coefficient), int_vec(e)),
                        None => grid(&t.coefficient),
                    })
                    .collect();
                let _ = writeln!(out, "  U{} = {}", k + 1, parts.join(" + "));
            }
            out.push_str("}\n");
        }
        Item::LObject(v) => {
            let _ = writeln!(out, "lobject {name} over {} {{", model(&v.model));
            let dims: Vec<(String, usize)> = v.classes.iter().map(|c| (c.name.clone(), c.dim)).collect();
            for c in &v.classes {
                let _ = writeln!(out, "  gen {}: deg={} dim={}", c.name, scalars(&c.degree), c.dim);
                for (k, op) in c.monodromy.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "    gamma{}: label={} nilpotent={}",
                        k + 1,
                        quoted(&op.label),
                        grid(&op.nilpotent)
                    );
                }
            }
            for cp in &v.couplings {
                let _ = writeln!(
                    out,
                    "  couple gamma{}: {} -> {} coeff={} x^{}",
                    cp.direction + 1,
                    gen_ref(&cp.from, &dims),
                    gen_ref(&cp.to, &dims),
                    quoted(&cp.coefficient),
                    int_vec(&cp.exponent)
                );
            }
            if let Some(f) = &v.frame {
                let _ = writeln!(out, "  frame = {}", grid(f));
            }
            out.push_str("}\n");
        }
        Item::Embedding(e) => {
            let _ = writeln!(out, "embedding {name} = {} infinity {}", model(&e.model), e.infinity);
        }
        Item::Germ(m) => {
            let _ = writeln!(out, "germ {name} = {}", grid(m));
        }
        Item::GermMap(g) => {
            let face: Vec<i64> = g.face.iter().map(|&i| i as i64).collect();
            let values: Vec<String> = g.values.iter().map(quoted).collect();
            let _ = writeln!(
                out,
                "germmap {name} for {} face {} = [{}]",
                g.monoid,
                int_vec(&face),
                values.join(",")
            );
        }
        Item::Family(ops) => {
            let parts: Vec<String> = ops
                .iter()
                .map(|op| match op {
                    KoszulOperator::Exact(m) => grid(m),
                    KoszulOperator::Log { label, nilpotent } => {
                        format!("log({}, {})", quoted(label), grid(nilpotent))
                    }
                })
                .collect();
            let _ = writeln!(out, "family {name} = [{}]", parts.join(", "));
        }
        Item::LocalSystem(w) => {
            let _ = writeln!(out, "locsys {name} on Z^{} {{", w.directions);
            let dims: Vec<(String, usize)> = w.blocks.iter().map(|b| (b.name.clone(), b.nilpotents[0].rows())).collect();
            for b in &w.blocks {
                let nil: Vec<String> = b.nilpotents.iter().map(grid).collect();
                let _ = writeln!(
                    out,
                    "  block {}: labels={} nilpotent=[{}]",
                    b.name,
                    scalars(&b.labels),
                    nil.join(", ")
                );
            }
            for cp in &w.couplings {
                let _ = writeln!(
                    out,
                    "  couple gamma{}: {} -> {} coeff={}",
                    cp.direction + 1,
                    gen_ref(&cp.from, &dims),
                    gen_ref(&cp.to, &dims),
                    quoted(&cp.coefficient)
                );
            }
            out.push_str("}\n");
        }
    }
}
