mod common;

use common::*;
use dpk_core::DocTable;
use dpk_transforms::doc_quality::DocQualityMetrics;
use dpk_transforms::lang_id::LangIdentifier;

/// Hand-evaluated metric values, frozen.
fn goldens() -> Vec<(&'static str, DocQualityMetrics)> {
    vec![
        (
            "the cat… sat #tag\n- item",
            DocQualityMetrics {
                total_words: 6,
                mean_word_len: 19.0 / 6.0,
                symbol_to_word_ratio: 2.0 / 6.0,
                bullet_line_ratio: 0.5,
                ellipsis_line_ratio: 0.0,
                alpha_word_ratio: 5.0 / 6.0,
                common_word_hits: 1,
            },
        ),
        (
            "the of and",
            DocQualityMetrics {
                total_words: 3,
                mean_word_len: 8.0 / 3.0,
                symbol_to_word_ratio: 0.0,
                bullet_line_ratio: 0.0,
                ellipsis_line_ratio: 0.0,
                alpha_word_ratio: 1.0,
                common_word_hits: 3,
            },
        ),
        (
            "Wait...\n* one\n* two\n• three\nThe end…",
            DocQualityMetrics {
                total_words: 9,
                mean_word_len: 28.0 / 9.0,
                symbol_to_word_ratio: 2.0 / 9.0,
                bullet_line_ratio: 3.0 / 5.0,
                ellipsis_line_ratio: 2.0 / 5.0,
                alpha_word_ratio: 6.0 / 9.0,
                common_word_hits: 1,
            },
        ),
        (
            "To be or not to be, that is the question; 42 !!",
            DocQualityMetrics {
                total_words: 12,
                mean_word_len: 3.0,
                symbol_to_word_ratio: 0.0,
                bullet_line_ratio: 0.0,
                ellipsis_line_ratio: 0.0,
                alpha_word_ratio: 10.0 / 12.0,
                common_word_hits: 4,
            },
        ),
        (
            "Ünïcode wörds ... and #### 123\n   - indented bullet\n\nwith HAVE",
            DocQualityMetrics {
                total_words: 11,
                mean_word_len: 48.0 / 11.0,
                symbol_to_word_ratio: 5.0 / 11.0,
                bullet_line_ratio: 0.25,
                ellipsis_line_ratio: 0.0,
                alpha_word_ratio: 7.0 / 11.0,
                common_word_hits: 3,
            },
        ),
        ("", DocQualityMetrics::default()),
    ]
}

#[test]
fn doc_quality_goldens_through_the_runtime() {
    let g = goldens();
    let store = store_with(&[DocTable::from_contents(g.iter().map(|(t, _)| *t))]);
    run(&store, "doc_quality", 1, &[]);
    let out = all_rows(&store);
    let col = |c: &str| -> Vec<f64> {
        match out.column(c).unwrap() {
            dpk_core::ColumnData::Int64(v) => v.iter().map(|&x| x as f64).collect(),
            dpk_core::ColumnData::Float64(v) => v.clone(),
            other => panic!("{other:?}"),
        }
    };
    let cols: Vec<Vec<f64>> = DocQualityMetrics::COLUMNS.iter().map(|c| col(c)).collect();
    for (row, (text, m)) in g.iter().enumerate() {
        let expected = [
            m.total_words as f64,
            m.mean_word_len,
            m.symbol_to_word_ratio,
            m.bullet_line_ratio,
            m.ellipsis_line_ratio,
            m.alpha_word_ratio,
            m.common_word_hits as f64,
        ];
        for (k, e) in expected.iter().enumerate() {
            let got = cols[k][row];
            assert!((got - e).abs() <= 1e-9, "{text:?} {}: {got} vs {e}", DocQualityMetrics::COLUMNS[k]);
        }
    }
}

const HELD_OUT_EN: &str = "Most software projects begin with a simple idea and a short list of goals. \
Over time the list grows, new people join the team, and the original design is stretched in ways \
nobody expected. Good engineers learn to notice when a piece of code has become too hard to change. \
They write small tests before they touch it, they rename things so that their purpose is clear, and \
they remove features that no longer serve anyone. This kind of work rarely appears in a release note, \
yet it decides whether the next change will take an hour or a month. Teams that invest in it tend to \
ship more often and with fewer surprises. Documentation matters as well. A clear explanation of how \
to build, test and deploy a system saves every newcomer a few days of confusion, and it forces the \
authors to admit which steps are fragile. When a build breaks, the first question should not be who \
broke it but what the failure is telling us about the process. Careful logging, honest reviews and a \
habit of measuring before optimizing are not glamorous, but they are what keeps a growing system \
healthy for many years after the first version was written.";

#[test]
fn held_out_english_paragraph() {
    let words = HELD_OUT_EN.split_whitespace().count();
    assert!((190..=230).contains(&words), "{words} words");
    let id = LangIdentifier::builtin();
    let (lang, score) = id.identify(HELD_OUT_EN);
    assert_eq!(lang, "en");
    assert!((0.0..=1.0).contains(&score));
}

const FIXTURES: [(&str, &str); 8] = [
    ("en", "Please remember to close the window before you leave the office tonight."),
    ("en", "The results of the survey were published last week and surprised many readers."),
    ("de", "Bitte denk daran, das Fenster zu schließen, bevor du heute Abend das Büro verlässt."),
    ("de", "Die Ergebnisse der Umfrage wurden letzte Woche veröffentlicht und haben viele Leser überrascht."),
    ("fr", "N'oublie pas de fermer la fenêtre avant de quitter le bureau ce soir."),
    ("fr", "Les résultats de l'enquête ont été publiés la semaine dernière et ont surpris beaucoup de lecteurs."),
    ("es", "Recuerda cerrar la ventana antes de salir de la oficina esta noche."),
    ("es", "Los resultados de la encuesta se publicaron la semana pasada y sorprendieron a muchos lectores."),
];

#[test]
fn fixtures_classify_and_survive_duplication() {
    let id = LangIdentifier::builtin();
    for (code, text) in FIXTURES {
        assert_eq!(id.identify(text).0, code, "{text}");
        let doubled = format!("{text} {text}");
        assert_eq!(id.identify(&doubled).0, code, "doubled {text}");
    }
}

#[test]
fn lang_id_columns_and_empty_document() {
    let store = store_with(&[DocTable::from_contents(["", HELD_OUT_EN])]);
    run(&store, "lang_id", 1, &[]);
    let out = all_rows(&store);
    assert_eq!(out.strings("lang").unwrap(), ["de", "en"]);
    match out.column("lang_score").unwrap() {
        dpk_core::ColumnData::Float64(v) => {
            assert_eq!(v[0], 0.0);
            assert!(v[1] > 0.0 && v[1] <= 1.0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn annotators_are_worker_count_independent_and_keep_rows() {
    let mut r = rng(9);
    let vocab = vocabulary(&mut r, 400, 5);
    let mut texts: Vec<String> = (0..600).map(|i| soup(&mut r, &vocab, i % 40)).collect();
    texts.extend(FIXTURES.iter().map(|(_, t)| t.to_string()));
    let tables: Vec<DocTable> = texts.chunks(61).map(|c| DocTable::from_contents(c.iter().cloned())).collect();
    for transform in ["doc_quality", "lang_id", "tokenizer", "doc_id"] {
        let one = store_with(&tables);
        run(&one, transform, 1, &[]);
        let four = store_with(&tables);
        run(&four, transform, 4, &[]);
        let (a, b) = (outputs(&one), outputs(&four));
        assert_eq!(a.len(), tables.len());
        for (i, ((na, ta), (nb, tb))) in a.iter().zip(&b).enumerate() {
            assert_eq!(na, nb);
            assert_eq!(ta.num_rows(), tables[i].num_rows());
            assert_eq!(ta.strings("contents").unwrap(), tables[i].strings("contents").unwrap());
            if transform == "doc_id" {
                // ids depend on scheduling; hashes do not
                assert_eq!(ta.strings("document_id").unwrap(), tb.strings("document_id").unwrap());
            } else {
                assert_eq!(ta, tb, "{transform} {na}");
            }
        }
    }
}

#[test]
fn lang_id_is_row_permutation_invariant() {
    let texts: Vec<&str> = FIXTURES.iter().map(|(_, t)| *t).collect();
    let mut reversed = texts.clone();
    reversed.reverse();
    let store = store_with(&[DocTable::from_contents(texts.clone())]);
    run(&store, "lang_id", 1, &[]);
    let rev = store_with(&[DocTable::from_contents(reversed)]);
    run(&rev, "lang_id", 1, &[]);
    let mut a: Vec<String> = all_rows(&store).strings("lang").unwrap().to_vec();
    let mut b: Vec<String> = all_rows(&rev).strings("lang").unwrap().to_vec();
    b.reverse();
    assert_eq!(a, b);
    a.sort();
    assert_eq!(a, ["de", "de", "en", "en", "es", "es", "fr", "fr"]);
}

#[test]
fn tokenizer_examples_through_runtime() {
    let store = store_with(&[DocTable::from_contents(["Hello, world!", "", "a  b\nc"])]);
    run(&store, "tokenizer", 2, &[]);
    assert_eq!(all_rows(&store).int64s("token_count").unwrap(), [2, 0, 3]);
}
