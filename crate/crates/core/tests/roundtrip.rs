use proptest::prelude::*;
use seqdiff_core::{parse_corpus, parse_corpus_str, write_corpus, Format};

fn reparse_all(input: &[u8], format: Format) {
    let Ok(corpus) = parse_corpus(input, format) else {
        return;
    };
    for out_format in [Format::Tsv, Format::Jsonl] {
        let mut buf = Vec::new();
        if write_corpus(&corpus, out_format, &mut buf).is_err() {
            continue;
        }
        let again = parse_corpus(buf.as_slice(), out_format).expect("written corpus must parse");
        assert_eq!(again, corpus);
    }
}

#[test]
fn fuzz_seeds_roundtrip() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fuzz/corpus");
    let mut seen = 0;
    for (dir, format) in [("parse_tsv", Format::Tsv), ("parse_jsonl", Format::Jsonl)] {
        for entry in std::fs::read_dir(format!("{root}/{dir}")).unwrap() {
            reparse_all(&std::fs::read(entry.unwrap().path()).unwrap(), format);
            seen += 1;
        }
    }
    assert!(seen >= 8);
}

#[test]
fn tsv_and_jsonl_agree() {
    let tsv = "# header\nA\ts1\tpush commit\n\nB\ts2\tissue\r\n";
    let jsonl = "{\"group\":\"A\",\"id\":\"s1\",\"events\":[\"push\",\"commit\"]}\n{\"group\":\"B\",\"id\":\"s2\",\"events\":[\"issue\"]}\n";
    assert_eq!(parse_corpus_str(tsv, Format::Tsv).unwrap(), parse_corpus_str(jsonl, Format::Jsonl).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arbitrary_tsv_roundtrips(lines in prop::collection::vec("[A#\\PC\t \r]{0,12}\t[a-c\\PC \t]{0,6}\t[ab \t\u{85}\u{a0}\\PC]{0,16}", 0..5)) {
        reparse_all(lines.join("\n").as_bytes(), Format::Tsv);
    }

    #[test]
    fn arbitrary_jsonl_roundtrips(records in prop::collection::vec(
        ("\\PC{0,6}", "\\PC{0,6}", prop::collection::vec("[ab\\PC \u{85}]{0,4}", 0..4)), 0..4)) {
        let text: Vec<String> = records
            .iter()
            .map(|(g, id, ev)| serde_json::json!({"group": g, "id": id, "events": ev}).to_string())
            .collect();
        reparse_all(text.join("\n").as_bytes(), Format::Jsonl);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        reparse_all(&bytes, Format::Tsv);
        reparse_all(&bytes, Format::Jsonl);
    }
}
