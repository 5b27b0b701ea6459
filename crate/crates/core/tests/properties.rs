//! Quantified invariants, checked with proptest.

use std::collections::BTreeSet;

use proptest::prelude::*;

use onconer::corpus::{
    cohen_kappa, corpus_stats, decode_bio, encode_bio, generate_synthetic, AlignmentPolicy,
    Document, EntityLabel, EntitySpan, PhraseInventory, RuleSplitter,
};
use onconer::encoder::{forward, resize_for_vocab, Checkpoint, InitPolicy, ModelConfig};
use onconer::eval::{aggregate_runs, categorize_document, match_spans, score, ErrorBreakdown, MatchMode};
use onconer::tokenizer::{
    encode_for_model, tokenize, wordpiece, Vocabulary, CONTINUATION_PREFIX, DEFAULT_MAX_WORD_CHARS,
};
use onconer::vocab_expand::{
    annotated_tokens, coverage, expand_curated, expand_frequency, extract_corpus_candidates,
    CandidateFilters,
};

const SPECIALS: [&str; 5] = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"];

fn vocab_from(entries: &BTreeSet<String>) -> Vocabulary {
    let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
    tokens.extend(entries.iter().cloned());
    Vocabulary::from_tokens(tokens).unwrap()
}

/// Entries over a three-letter alphabet, some carrying the continuation prefix.
fn small_vocab() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set(("(##)?[abc]{1,4}").prop_map(|s| s), 1..25)
}

/// Straightforward greedy longest-match, written independently of the library.
fn reference_pieces(word: &str, vocab: &BTreeSet<String>) -> Option<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let prefix = if start == 0 { "" } else { "##" };
        let found = (start + 1..=chars.len()).rev().find_map(|end| {
            let cand = format!("{prefix}{}", chars[start..end].iter().collect::<String>());
            vocab.contains(&cand).then_some((cand, end))
        });
        let (piece, end) = found?;
        out.push(piece);
        start = end;
    }
    Some(out)
}

fn strip(pieces: &[String]) -> String {
    pieces
        .iter()
        .map(|p| p.strip_prefix(CONTINUATION_PREFIX).unwrap_or(p))
        .collect()
}

fn label_strategy() -> impl Strategy<Value = EntityLabel> {
    (0..EntityLabel::COUNT).prop_map(|i| EntityLabel::from_index(i).unwrap())
}

fn spans(text_len: usize) -> impl Strategy<Value = Vec<EntitySpan>> {
    prop::collection::vec((0..text_len, 1..8usize, label_strategy()), 0..10).prop_map(move |v| {
        let set: BTreeSet<EntitySpan> = v
            .into_iter()
            .map(|(s, w, l)| EntitySpan::new(s, (s + w).min(text_len), l))
            .filter(|s| !s.is_empty())
            .collect();
        set.into_iter().collect()
    })
}

fn doc(id: &str, entities: Vec<EntitySpan>) -> Document {
    Document::new(id, "x".repeat(60), entities).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wordpiece_is_greedy_longest_match(entries in small_vocab(), word in "[abcd]{1,10}") {
        let vocab = vocab_from(&entries);
        let pieces = wordpiece(&word, &vocab, DEFAULT_MAX_WORD_CHARS);
        match reference_pieces(&word, &entries) {
            Some(expected) => {
                prop_assert_eq!(&pieces, &expected);
                prop_assert_eq!(strip(&pieces), word);
            }
            None => prop_assert_eq!(pieces, vec!["[UNK]".to_string()]),
        }
    }

    #[test]
    fn tokenize_offsets_are_monotone_and_disjoint(text in "[a-zA-Z0-9 .,;:()/%-]{0,60}|\\PC{0,30}") {
        let vocab = Vocabulary::builtin_base();
        let t = tokenize(&text, &vocab);
        prop_assert_eq!(&t, &tokenize(&text, &vocab));
        prop_assert_eq!(t.pieces.len(), t.offsets.len());
        let n_chars = text.chars().count();
        for w in t.offsets.windows(2) {
            prop_assert!(w[0].1 <= w[1].0, "overlap {:?}", w);
        }
        for &(s, e) in &t.offsets {
            prop_assert!(s < e && e <= n_chars);
        }
    }

    #[test]
    fn model_input_has_exact_length(text in "[a-z .]{0,200}", max_len in 2usize..64) {
        let vocab = Vocabulary::builtin_base();
        let input = encode_for_model(&tokenize(&text, &vocab), &vocab, max_len);
        prop_assert_eq!(input.ids.len(), max_len);
        prop_assert_eq!(input.attention_mask.len(), max_len);
    }

    #[test]
    fn adding_a_word_makes_it_one_piece(entries in small_vocab(), word in "[abcd]{1,8}") {
        let mut grown = entries.clone();
        grown.insert(word.clone());
        let pieces = wordpiece(&word, &vocab_from(&grown), DEFAULT_MAX_WORD_CHARS);
        prop_assert_eq!(pieces, vec![word]);
    }

    #[test]
    fn growth_leaves_unrelated_words_alone(
        entries in small_vocab(),
        added in "d[abcd]{0,4}",
        word in "[abc][abcd]{0,8}",
    ) {
        // `added` starts with a letter `word` cannot start with, so it is
        // never a candidate at position 0 and continuation lookups ignore it.
        let before = wordpiece(&word, &vocab_from(&entries), DEFAULT_MAX_WORD_CHARS);
        let mut grown = entries.clone();
        grown.insert(added);
        prop_assert_eq!(before, wordpiece(&word, &vocab_from(&grown), DEFAULT_MAX_WORD_CHARS));
    }

    #[test]
    fn kappa_is_symmetric(pairs in prop::collection::vec((0u8..4, 0u8..4), 1..80)) {
        let a: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let ab = cohen_kappa(&a, &b).unwrap();
        prop_assert_eq!(ab, cohen_kappa(&b, &a).unwrap());
        prop_assert!((-1.0..=1.0).contains(&ab));
        if a.iter().any(|&x| x != a[0]) {
            prop_assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
        }
    }

    #[test]
    fn lenient_dominates_exact(gold in spans(60), pred in spans(60)) {
        let report = score(&[doc("d", gold.clone())], &[doc("d", pred.clone())]).unwrap();
        for label in EntityLabel::ALL {
            let e = &report.exact.per_label[&label];
            let l = &report.lenient.per_label[&label];
            prop_assert!(l.tp >= e.tp);
            for f in [e.f1, l.f1] {
                prop_assert!((0.0..=1.0).contains(&f));
            }
        }
        for m in [&report.exact, &report.lenient] {
            prop_assert!((0.0..=1.0).contains(&m.micro.f1));
            prop_assert!((0.0..=1.0).contains(&m.macro_f1));
        }
        let own = score(&[doc("d", gold.clone())], &[doc("d", gold.clone())]).unwrap();
        for span in &gold {
            prop_assert_eq!(own.exact.per_label[&span.label].f1, 1.0);
            prop_assert_eq!(own.lenient.per_label[&span.label].f1, 1.0);
        }
    }

    #[test]
    fn matching_is_one_to_one(gold in spans(60), pred in spans(60)) {
        for mode in MatchMode::BOTH {
            let m = match_spans(&gold, &pred, mode);
            let gs: BTreeSet<usize> = m.pairs.iter().map(|p| p.0).collect();
            let ps: BTreeSet<usize> = m.pairs.iter().map(|p| p.1).collect();
            prop_assert_eq!(gs.len(), m.pairs.len());
            prop_assert_eq!(ps.len(), m.pairs.len());
            let t = m.total();
            prop_assert_eq!(t.tp + t.fn_, gold.len());
            prop_assert_eq!(t.tp + t.fp, pred.len());
        }
    }

    #[test]
    fn every_error_is_categorized_once(gold in spans(60), pred in spans(60)) {
        let mut b = ErrorBreakdown::default();
        categorize_document("d", &gold, &pred, &mut b);
        let exact = match_spans(&gold, &pred, MatchMode::Exact).total();
        prop_assert_eq!(b.fn_accounted(), exact.fn_);
        prop_assert_eq!(b.fp_accounted(), exact.fp);
        prop_assert_eq!(
            b.boundary_mismatch + b.missing + b.type_confusion + b.spurious,
            b.cases.len()
        );
    }

    #[test]
    fn aggregation_ignores_run_order(
        runs in prop::collection::vec((spans(60), spans(60)), 2..6),
        rotate in 0usize..6,
    ) {
        let reports: Vec<_> = runs
            .iter()
            .map(|(g, p)| score(&[doc("d", g.clone())], &[doc("d", p.clone())]).unwrap())
            .collect();
        let mut shuffled = reports.clone();
        shuffled.rotate_left(rotate % reports.len());
        shuffled.reverse();
        prop_assert_eq!(
            aggregate_runs(&reports, 0.95).unwrap(),
            aggregate_runs(&shuffled, 0.95).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bio_round_trip_on_synthetic_documents(seed in 0u64..10_000) {
        let vocab = Vocabulary::builtin_base();
        for d in generate_synthetic(seed, 3, &PhraseInventory::default()).unwrap() {
            let t = tokenize(&d.text, &vocab);
            let enc = encode_bio(&t, &d.entities, AlignmentPolicy::Strict).unwrap();
            prop_assert!(enc.warnings.is_empty());
            prop_assert_eq!(decode_bio(&enc.tags, &t, true).unwrap(), d.entities.clone());
        }
    }

    #[test]
    fn synthesis_is_pure_and_stats_ignore_order(seed in 0u64..10_000, rotate in 0usize..6) {
        let inv = PhraseInventory::default();
        let docs = generate_synthetic(seed, 6, &inv).unwrap();
        prop_assert_eq!(&docs, &generate_synthetic(seed, 6, &inv).unwrap());
        let mut reordered = docs.clone();
        reordered.rotate_left(rotate);
        reordered.reverse();
        prop_assert_eq!(corpus_stats(&docs, &RuleSplitter), corpus_stats(&reordered, &RuleSplitter));
    }

    #[test]
    fn expansion_keeps_size_and_never_lowers_coverage(seed in 0u64..10_000, keep in prop::collection::vec(any::<bool>(), 64)) {
        let base = Vocabulary::builtin_base();
        let docs = generate_synthetic(seed, 8, &PhraseInventory::default()).unwrap();
        let words: Vec<String> = annotated_tokens(&docs)
            .into_values()
            .flatten()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .zip(keep.iter().cycle())
            .filter(|(_, &k)| k)
            .map(|(w, _)| w)
            .collect();
        let curated = expand_curated(&base, &words).unwrap().vocab;
        let filters = CandidateFilters { min_count: 1, ..Default::default() };
        let candidates = extract_corpus_candidates(&docs, &base, &filters);
        prop_assert_eq!(&candidates, &extract_corpus_candidates(&docs, &base, &filters));
        let freq = expand_frequency(&base, &candidates, 997).unwrap().vocab;
        prop_assert_eq!(&freq, &expand_frequency(&base, &candidates, 997).unwrap().vocab);

        let before = coverage(&base, &docs);
        for grown in [&curated, &freq] {
            prop_assert_eq!(grown.len(), base.len());
            let after = coverage(grown, &docs);
            for (label, row) in &before.per_label {
                prop_assert!(after.per_label[label].covered >= row.covered);
            }
            prop_assert!(after.total.covered >= before.total.covered);
        }
    }

    #[test]
    fn masked_inputs_do_not_leak(
        ids in prop::collection::vec(5u32..40, 2..12),
        n_masked in 1usize..6,
        replacement in 0u32..40,
        position in 0usize..6,
    ) {
        let config = ModelConfig::tiny(40);
        let vocab_tokens: Vec<String> = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain((5..40).map(|i| format!("w{i}")))
            .collect();
        let vocab = Vocabulary::from_tokens(vocab_tokens).unwrap();
        let ckpt = Checkpoint::init(config, &vocab).unwrap();
        let len = (ids.len() + n_masked).min(config.max_positions);
        let mut input: Vec<u32> = ids.clone();
        input.resize(len, 0);
        let mask: Vec<u8> = (0..len).map(|i| u8::from(i < ids.len().min(len))).collect();
        let masked: Vec<usize> = (0..len).filter(|&i| mask[i] == 0).collect();
        prop_assume!(!masked.is_empty());
        let mut perturbed = input.clone();
        perturbed[masked[position % masked.len()]] = replacement;

        let a = forward(&ckpt.weights, &config, &input, &mask).unwrap();
        let b = forward(&ckpt.weights, &config, &perturbed, &mask).unwrap();
        for i in (0..len).filter(|&i| mask[i] == 1) {
            prop_assert_eq!(a.row(i), b.row(i));
        }
    }

    #[test]
    fn warm_start_touches_only_rewritten_rows(keep in prop::collection::vec(any::<bool>(), 12), seed in 0u64..100) {
        let base = Vocabulary::builtin_base();
        let pool = ["her2", "dcis", "pt4", "lcis", "ihc", "nx", "mx", "pr", "ki67", "tnm", "brca", "fish"];
        let words: Vec<&str> = pool.iter().zip(&keep).filter(|(_, &k)| k).map(|(w, _)| *w).collect();
        let exp = expand_curated(&base, &words).unwrap();
        let rewritten: BTreeSet<usize> = exp.rewritten.iter().map(|(id, _)| *id as usize).collect();
        let ckpt = Checkpoint::init(ModelConfig::tiny(base.len()), &base).unwrap();
        for policy in [InitPolicy::SubwordMean, InitPolicy::Random, InitPolicy::KeepSlotRow] {
            let out = resize_for_vocab(&ckpt, &base, &exp.vocab, policy, seed).unwrap();
            let (old, new) = (&ckpt.weights.tok_emb, &out.weights.tok_emb);
            for r in 0..old.nrows() {
                if !rewritten.contains(&r) {
                    prop_assert_eq!(old.row(r), new.row(r));
                }
            }
            prop_assert_eq!(&ckpt.weights.pos_emb, &out.weights.pos_emb);
            prop_assert!(std::ptr::eq(out.weights.mlm_decoder(), &out.weights.tok_emb));
        }
    }
}

/// Greedy longest-match is not monotone in general: a new whole-word
/// prefix can steal characters a longer continuation piece needed.
#[test]
fn growth_can_lengthen_a_word_with_a_shared_prefix() {
    let entries: BTreeSet<String> = ["a", "##bcd", "##b", "##c", "##d"].map(String::from).into();
    let before = wordpiece("abcd", &vocab_from(&entries), DEFAULT_MAX_WORD_CHARS);
    let mut grown = entries.clone();
    grown.insert("ab".into());
    let after = wordpiece("abcd", &vocab_from(&grown), DEFAULT_MAX_WORD_CHARS);
    assert_eq!(before, ["a", "##bcd"]);
    assert_eq!(after, ["ab", "##c", "##d"]);
}
