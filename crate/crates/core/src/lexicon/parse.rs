//! Line parsers for the plain-text WordNet database layout.
//!
//! Index lines:
//! `lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt synset_offset [synset_offset...]`
//!
//! Data lines:
//! `synset_offset lex_filenum ss_type w_cnt word lex_id [word lex_id...] p_cnt [ptr...] [frames...] | gloss`
//!
//! where each pointer is `pointer_symbol synset_offset pos source/target`.
//! Lines starting with two spaces are the license preamble and are skipped
//! by the caller.

use super::PartOfSpeech;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct IndexLine {
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub offsets: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawPointer {
    pub symbol: String,
    pub offset: u32,
    pub pos: PartOfSpeech,
    /// 1-based word number in the source synset, 0 for semantic pointers.
    pub source: u16,
    /// 1-based word number in the target synset, 0 for semantic pointers.
    pub target: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DataLine {
    pub offset: u32,
    pub pos: PartOfSpeech,
    pub words: Vec<String>,
    pub pointers: Vec<RawPointer>,
    pub gloss: String,
}

fn next<'a, I: Iterator<Item = &'a str>>(it: &mut I, what: &str) -> Result<&'a str, String> {
    it.next().ok_or_else(|| format!("truncated line: expected {what}"))
}

fn decimal<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.parse::<T>()
        .map_err(|_| format!("invalid {what} `{s}`"))
}

fn hex(s: &str, what: &str) -> Result<u16, String> {
    u16::from_str_radix(s, 16).map_err(|_| format!("invalid {what} `{s}`"))
}

/// Canonical lemma form: lowercase, adjective syntactic markers removed.
pub(crate) fn canonical_word(raw: &str) -> String {
    let word = match raw.find('(') {
        Some(i) if raw.ends_with(')') => &raw[..i],
        _ => raw,
    };
    word.to_lowercase()
}

pub(crate) fn parse_index_line(line: &str) -> Result<IndexLine, String> {
    let mut it = line.split_ascii_whitespace();
    let lemma = next(&mut it, "lemma")?.to_string();
    let pos_str = next(&mut it, "pos")?;
    let pos = PartOfSpeech::from_synset_type(pos_str)
        .ok_or_else(|| format!("invalid pos `{pos_str}`"))?;
    let synset_cnt: usize = decimal(next(&mut it, "synset_cnt")?, "synset_cnt")?;
    let p_cnt: usize = decimal(next(&mut it, "p_cnt")?, "p_cnt")?;
    for _ in 0..p_cnt {
        next(&mut it, "pointer symbol")?;
    }
    let _sense_cnt: usize = decimal(next(&mut it, "sense_cnt")?, "sense_cnt")?;
    let _tagsense_cnt: usize = decimal(next(&mut it, "tagsense_cnt")?, "tagsense_cnt")?;
    let mut offsets = Vec::with_capacity(synset_cnt);
    for _ in 0..synset_cnt {
        offsets.push(decimal(next(&mut it, "synset_offset")?, "synset_offset")?);
    }
    if it.next().is_some() {
        return Err("trailing fields after synset offsets".into());
    }
    if lemma.is_empty() {
        return Err("empty lemma".into());
    }
    Ok(IndexLine { lemma, pos, offsets })
}

pub(crate) fn parse_data_line(line: &str) -> Result<DataLine, String> {
    let (body, gloss) = match line.split_once(" | ") {
        Some((b, g)) => (b, g.trim_end().to_string()),
        None => (line.trim_end().trim_end_matches('|'), String::new()),
    };
    let mut it = body.split_ascii_whitespace();
    let offset: u32 = decimal(next(&mut it, "synset_offset")?, "synset_offset")?;
    let _lex_filenum: u32 = decimal(next(&mut it, "lex_filenum")?, "lex_filenum")?;
    let ss_type = next(&mut it, "ss_type")?;
    let pos = PartOfSpeech::from_synset_type(ss_type)
        .ok_or_else(|| format!("invalid ss_type `{ss_type}`"))?;
    let w_cnt = hex(next(&mut it, "w_cnt")?, "w_cnt")?;
    if w_cnt == 0 {
        return Err("synset without words".into());
    }
    let mut words = Vec::with_capacity(w_cnt as usize);
    for _ in 0..w_cnt {
        let word = canonical_word(next(&mut it, "word")?);
        if word.is_empty() {
            return Err("empty word".into());
        }
        hex(next(&mut it, "lex_id")?, "lex_id")?;
        words.push(word);
    }
    let p_cnt: usize = decimal(next(&mut it, "p_cnt")?, "p_cnt")?;
    let mut pointers = Vec::with_capacity(p_cnt);
    for _ in 0..p_cnt {
        let symbol = next(&mut it, "pointer symbol")?.to_string();
        let target_offset: u32 = decimal(next(&mut it, "pointer offset")?, "pointer offset")?;
        let pos_str = next(&mut it, "pointer pos")?;
        let target_pos = PartOfSpeech::from_synset_type(pos_str)
            .ok_or_else(|| format!("invalid pointer pos `{pos_str}`"))?;
        let st = next(&mut it, "source/target")?;
        if st.len() != 4 {
            return Err(format!("invalid source/target `{st}`"));
        }
        let source = hex(&st[..2], "source word")?;
        let target = hex(&st[2..], "target word")?;
        if source as usize > words.len() {
            return Err(format!("pointer source word {source} out of range"));
        }
        pointers.push(RawPointer {
            symbol,
            offset: target_offset,
            pos: target_pos,
            source,
            target,
        });
    }
    // Verb frames follow the pointers; they carry nothing we use.
    Ok(DataLine {
        offset,
        pos,
        words,
        pointers,
        gloss,
    })
}
