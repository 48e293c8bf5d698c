#![no_main]

use libfuzzer_sys::fuzz_target;
use seqdiff_core::{parse_corpus, write_corpus, Format};

fuzz_target!(|data: &[u8]| {
    let Some((&selector, input)) = data.split_first() else {
        return;
    };
    let format = if selector % 2 == 0 { Format::Tsv } else { Format::Jsonl };
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
});
