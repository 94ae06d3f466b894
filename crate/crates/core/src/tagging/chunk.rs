use super::{NounChunk, Tag, TaggedToken};

/// Maximal `DET? ADJ* (NOUN|PROPN)+` runs, scanned left to right.
///
/// An adjective after a noun opens a new chunk, so "individuals nutritional
/// status" yields "individuals" and "nutritional status".
pub fn noun_chunks(tokens: &[TaggedToken]) -> Vec<NounChunk> {
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let start = i;
        let mut j = i;
        if tokens[j].tag == Tag::Det {
            j += 1;
        }
        while j < tokens.len() && tokens[j].tag == Tag::Adj {
            j += 1;
        }
        let nouns_start = j;
        while j < tokens.len() && tokens[j].tag.is_nominal() {
            j += 1;
        }
        if j > nouns_start {
            chunks.push(NounChunk {
                start,
                end: j,
                head: j - 1,
            });
            i = j;
        } else {
            i += 1;
        }
    }
    chunks
}
