use logres_cli::document::{IdealDecl, MonoidFactor};
use logres_cli::{parse, parse_with, print, Item, Kind};
use logres_core::canext::TauSection;
use logres_core::germ::RatFunc;

fn item(text: &str) -> Item {
    let doc = parse(text).unwrap();
    assert_eq!(doc.declarations.len(), 1);
    doc.declarations[0].item.clone()
}

#[test]
fn literal_monoid() {
    assert_eq!(
        item("monoid P = [[1,0],[0,1]]"),
        Item::Monoid(vec![MonoidFactor::Literal(vec![vec![1, 0], vec![0, 1]])])
    );
}

#[test]
fn product_monoid() {
    let doc = parse("monoid A = [[1]]\nmonoid B = A * N^2 * Z^1").unwrap();
    assert_eq!(
        doc.get("B").unwrap().item,
        Item::Monoid(vec![MonoidFactor::Named("A".into()), MonoidFactor::Free(2), MonoidFactor::Lattice(1)])
    );
}

#[test]
fn truncated_input_reports_position() {
    let err = parse("monoid P = [[1,0],[1,").unwrap_err();
    assert_eq!((err.line, err.col), (1, 22));
    assert_eq!(err.found, "end of input");
    assert!(err.expected.iter().any(|e| e.contains("integer")), "{:?}", err.expected);
}

#[test]
fn tau_window() {
    let Item::Tau(t) = item("tau T = window(-1,0]") else { panic!("not a tau") };
    assert_eq!(t, TauSection::default());
    let Item::Tau(t) = item("tau T = window(-1/2, 1/2]") else { panic!("not a tau") };
    assert_eq!(t, "(-1/2,1/2]".parse::<TauSection>().unwrap());
    assert!(parse("tau T = window(-1,1]").is_err());
}

#[test]
fn maximal_ideal() {
    let doc = parse("monoid P = N^2\nideal K in P = maximal").unwrap();
    assert_eq!(doc.get("K").unwrap().item, Item::Ideal(IdealDecl { monoid: "P".into(), generators: None }));
}

#[test]
fn germ_expressions() {
    let Item::Germ(m) = item("germ A = [[\"1/t\", \"(1+t)^2\"], [\"t^-2\", \"i*t - 3/4\"]]") else {
        panic!("not a germ")
    };
    assert_eq!(m.get(0, 0), &RatFunc::t_pow(-1));
    assert_eq!(m.get(1, 0), &RatFunc::t_pow(-2));
    assert_eq!(m.get(0, 1).to_string(), "t^2+2*t+1");
    // Printed rational functions read back as the same value.
    let doc = parse(&format!("germ B = [[\"{}\"]]", m.get(1, 1))).unwrap();
    let Item::Germ(back) = &doc.declarations[0].item else { unreachable!() };
    assert_eq!(back.get(0, 0), m.get(1, 1));
}

#[test]
fn unknown_references_are_rejected() {
    assert!(parse("ideal K in P = maximal").is_err());
    assert!(parse("monoid P = N^1\nconnection C over (P,K) {\n U1 = [[\"0\"]]\n}").is_err());
}

#[test]
fn duplicate_names_are_rejected() {
    assert!(parse("monoid P = N^1\nmonoid P = N^2").is_err());
}

#[test]
fn unknown_keyword() {
    let err = parse("variety X = [[1]]").unwrap_err();
    assert_eq!((err.line, err.col), (1, 1));
}

#[test]
fn context_supplies_earlier_declarations() {
    let base = parse("monoid P = N^1").unwrap();
    let more = parse_with("ideal K in P = maximal", &base).unwrap();
    assert_eq!(more.of_kind(Kind::Ideal).count(), 1);
}

#[test]
fn corpus_round_trips() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let doc = parse(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let printed = print(&doc);
        assert_eq!(parse(&printed).unwrap(), doc, "{}", path.display());
        assert_eq!(print(&parse(&printed).unwrap()), printed);
        seen += 1;
    }
    assert!(seen >= 10);
}
