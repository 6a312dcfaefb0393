//! Inputs for the pipeline benchmarks.

use tara_core::sdp::{parse_sdp_document, SdpDocument};

pub const MANUAL: &str = include_str!("../../core/fixtures/scratch_card.sdp.json");
pub const QUESTIONS: [&str; 3] = [
    include_str!("../../core/fixtures/questions/q1.sdp.json"),
    include_str!("../../core/fixtures/questions/q2.sdp.json"),
    include_str!("../../core/fixtures/questions/q3.sdp.json"),
];

pub fn manual() -> SdpDocument {
    parse_sdp_document(MANUAL).expect("bundled manual parses")
}

pub fn questions() -> Vec<SdpDocument> {
    QUESTIONS
        .iter()
        .map(|q| parse_sdp_document(q).expect("bundled question parses"))
        .collect()
}

/// The manual repeated `copies` times under one id, as a larger input.
pub fn long_manual(copies: usize) -> SdpDocument {
    let base = manual();
    let mut doc = base.clone();
    doc.sentences.clear();
    for _ in 0..copies {
        for s in &base.sentences {
            let mut s = s.clone();
            s.sentence_index = doc.sentences.len();
            doc.sentences.push(s);
        }
    }
    doc
}

#[cfg(test)]
mod tests {
    #[test]
    fn inputs_load() {
        assert_eq!(super::questions().len(), 3);
        assert_eq!(super::long_manual(3).sentences.len(), 21);
        super::long_manual(3).validate().unwrap();
    }
}
