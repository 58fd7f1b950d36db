use spalign::io::{overlay, parse_grammar};
use spalign::ws::MAX_CHAIN_DEPTH;
use spalign::{
    build_grammar, corpus_manifest, load_corpus, resolve, resolve_with_fallback,
    resolve_with_inheritance, schema_pair_report, ChainKind, Grammar, RawPattern, SearchConfig,
    WsError, WsQuery,
};

const FEARED: &str =
    "the city councilmen refused the demonstrators a permit because they feared violence";
const ADVOCATED: &str =
    "the city councilmen refused the demonstrators a permit because they advocated revolution";

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn referent(g: &Grammar, sentence: &str, pronoun: &str) -> Result<String, WsError> {
    let q = WsQuery::new(g, &words(sentence), pronoun)?;
    resolve_with_fallback(&q, &SearchConfig::default()).map(|r| r.referent_word)
}

/// The councilmen grammar with `N3` reaching `PEACE_LOVING` through `levels`
/// class patterns.
fn hierarchy(levels: usize) -> Grammar {
    let base = load_corpus(&["councilmen.spg"]).unwrap().records();
    let mut extra = vec![RawPattern::new(
        "N3",
        1,
        1,
        "N n3 councilmen COUNCILMEN K1 #K1 #N",
    )];
    for k in 1..=levels {
        let tail = if k == levels {
            "PEACE_LOVING".to_string()
        } else {
            format!("K{} #K{}", k + 1, k + 1)
        };
        extra.push(RawPattern::new(
            format!("K{k}"),
            1,
            1,
            &format!("K{k} k{k} {tail} #K{k}"),
        ));
    }
    build_grammar(&overlay(&[base, extra])).unwrap()
}

#[test]
fn query_preconditions() {
    let g = load_corpus(&["fish_worm.spg"]).unwrap();
    assert_eq!(
        WsQuery::new(&g, &[], "it").unwrap_err(),
        WsError::EmptySentence
    );
    assert_eq!(
        WsQuery::new(&g, &words("the fish ate"), "it").unwrap_err(),
        WsError::PronounNotInSentence("it".into())
    );
    let q = WsQuery::new(&g, &words("the fish ate the worm it was tasty"), "it").unwrap();
    let r = schema_pair_report(&q, &q, &SearchConfig::default());
    assert_eq!(r.unwrap_err(), WsError::IdenticalSentences);
}

#[test]
fn different_grammars_are_rejected() {
    let g = load_corpus(&["fish_worm.spg"]).unwrap();
    let h = load_corpus(&["fish_worm.spg"]).unwrap();
    let a = WsQuery::new(&g, &words("the fish ate the worm it was tasty"), "it").unwrap();
    let b = WsQuery::new(&h, &words("the fish ate the worm it was hungry"), "it").unwrap();
    assert_eq!(
        schema_pair_report(&a, &b, &SearchConfig::default()).unwrap_err(),
        WsError::DifferentGrammars
    );
}

#[test]
fn invalid_config_is_reported() {
    let g = load_corpus(&["fish_worm.spg"]).unwrap();
    let q = WsQuery::new(&g, &words("the fish ate the worm it was tasty"), "it").unwrap();
    let cfg = SearchConfig {
        beam_width: 0,
        ..SearchConfig::default()
    };
    assert!(matches!(resolve(&q, &cfg), Err(WsError::InvalidConfig(_))));
}

#[test]
fn feared_violence_uses_the_peace_loving_bridge() {
    let g = load_corpus(&["councilmen.spg"]).unwrap();
    let q = WsQuery::new(&g, &words(FEARED), "they").unwrap();
    let r = resolve(&q, &SearchConfig::default()).unwrap();
    assert_eq!(r.referent_word, "councilmen");
    assert_eq!(r.bridge_pattern_id, "BR0");
    assert_eq!(g.pattern(g.index_of("BR0").unwrap()).symbols.len(), 5);
    assert_eq!(r.attribute_name, "PEACE_LOVING");
    assert_eq!(r.kind, ChainKind::Attribute);
    assert_eq!(r.chain, vec!["N3".to_string()]);
}

#[test]
fn inheritance_chain_runs_through_the_class_pattern() {
    let g = load_corpus(&["councilmen.spg", "councilmen_inherit.spg"]).unwrap();
    let q = WsQuery::new(&g, &words(FEARED), "they").unwrap();
    assert_eq!(
        resolve(&q, &SearchConfig::default()).unwrap_err(),
        WsError::NoBridge
    );
    let r = resolve_with_inheritance(&q, &SearchConfig::default()).unwrap();
    assert_eq!(r.referent_word, "councilmen");
    assert_eq!(r.chain, vec!["N3".to_string(), "DP0".to_string()]);
}

#[test]
fn class_of_class_is_followed() {
    assert_eq!(
        referent(&hierarchy(2), FEARED, "they").unwrap(),
        "councilmen"
    );
}

#[test]
fn chains_longer_than_the_depth_limit_are_not_followed() {
    assert_eq!(
        referent(&hierarchy(MAX_CHAIN_DEPTH), FEARED, "they").unwrap(),
        "councilmen"
    );
    assert_eq!(
        referent(&hierarchy(MAX_CHAIN_DEPTH + 1), FEARED, "they").unwrap_err(),
        WsError::NoBridge
    );
}

#[test]
fn swapping_bridge_attributes_swaps_referents() {
    let recs: Vec<RawPattern> = load_corpus(&["councilmen.spg"])
        .unwrap()
        .records()
        .into_iter()
        .map(|mut r| {
            match r.id.as_str() {
                "BR0" => r = RawPattern::new("BR0", r.frequency, 0, "RADICAL_CHANGE PN #PN v1 n0"),
                "BR1" => r = RawPattern::new("BR1", r.frequency, 0, "PEACE_LOVING PN #PN v2 n1"),
                _ => {}
            }
            r
        })
        .collect();
    let g = build_grammar(&recs).unwrap();
    assert_eq!(referent(&g, FEARED, "they").unwrap(), "demonstrators");
    assert_eq!(referent(&g, ADVOCATED, "they").unwrap(), "councilmen");
}

#[test]
fn scaling_frequencies_keeps_referents() {
    for item in corpus_manifest().iter().step_by(2) {
        let g = load_corpus(&[item.grammar.as_str()]).unwrap().scaled(13);
        assert_eq!(
            referent(&g, &item.sentence.join(" "), &item.pronoun).unwrap(),
            item.referent
        );
    }
}

#[test]
fn resolution_is_deterministic() {
    let g = load_corpus(&["pete_martin.spg"]).unwrap();
    let q = WsQuery::new(
        &g,
        &words("pete envies martin because he is very successful"),
        "he",
    )
    .unwrap();
    let cfg = SearchConfig::default();
    let (a, b) = (
        resolve_with_fallback(&q, &cfg).unwrap(),
        resolve_with_fallback(&q, &cfg).unwrap(),
    );
    assert_eq!(a.referent_word, "martin");
    assert_eq!(a.kind, ChainKind::RoleSlot);
    assert_eq!(a.best_alignment, b.best_alignment);
    assert_eq!(a.confidence.to_bits(), b.confidence.to_bits());
}

#[test]
fn overlay_replaces_records_by_id() {
    let base = parse_grammar("A | 1 | 0 | a\nB | 1 | 0 | b\n").unwrap();
    let top = parse_grammar("B | 2 | 0 | c\nC | 1 | 0 | d\n").unwrap();
    let merged = overlay(&[base, top]);
    let ids: Vec<&str> = merged.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["A", "B", "C"]);
    assert_eq!(merged[1].frequency, 2);
}
