#![no_main]

use libfuzzer_sys::fuzz_target;
use seqdiff_core::{parse_corpus, Format};

fuzz_target!(|data: &[u8]| {
    let _ = parse_corpus(data, Format::Jsonl);
});
