use unicode_normalization::UnicodeNormalization;

use super::{Document, Passage};

pub const DEFAULT_PASSAGE_SIZE: usize = 100;

fn allowed(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '.' | ',' | ';' | ':' | '?' | '!' | '(' | ')' | '-')
}

/// Normalizes raw source text to the retrievable form.
///
/// Line breaks (and any other whitespace) become single spaces, characters
/// outside letters, digits and `.,;:?!()-` are dropped, whitespace runs are
/// collapsed and the result is trimmed. `None` means nothing survived, and
/// the caller should drop the document.
pub fn clean_text(raw: &str) -> Option<String> {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    // NFC first so decomposed accents survive the character filter.
    for c in raw.nfc() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else if allowed(c) {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    // Dropping characters can leave newly composable neighbours.
    (!out.is_empty()).then(|| out.nfc().collect())
}

/// Splits a cleaned document into consecutive non-overlapping windows of
/// `passage_size` words. The last window keeps the remainder.
///
/// Returned passages carry `passage_id == index_in_doc`; stores re-number
/// them from their own allocator.
pub fn chunk(doc: &Document, passage_size: usize) -> Vec<Passage> {
    assert!(passage_size > 0, "passage size must be positive");
    let words: Vec<&str> = doc.body.split_whitespace().collect();
    words
        .chunks(passage_size)
        .enumerate()
        .map(|(i, window)| Passage {
            passage_id: i as u64,
            doc_id: doc.id,
            index_in_doc: i as u32,
            text: window.join(" "),
            word_count: window.len() as u32,
        })
        .collect()
}
