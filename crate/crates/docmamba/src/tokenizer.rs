//! Pluggable tokenization.
//!
//! The default [`ByteTokenizer`] maps every word to its UTF-8 bytes, so
//! desk-scale corpora need no trained vocabulary. A subword tokenizer can be
//! swapped in behind the same trait.

/// Reserved vocabulary indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecialTokens {
    pub cls_id: u32,
    pub mask_id: u32,
    pub pad_id: u32,
    pub unk_id: u32,
}

pub trait Tokenizer {
    fn vocab_size(&self) -> usize;

    fn specials(&self) -> SpecialTokens;

    /// Splits one word into token ids. Never emits special ids.
    fn encode_word(&self, word: &str) -> Vec<u32>;

    /// Best-effort inverse of `encode_word` for display.
    fn decode(&self, ids: &[u32]) -> String;

    fn is_special(&self, id: u32) -> bool {
        let s = self.specials();
        id == s.cls_id || id == s.mask_id || id == s.pad_id || id == s.unk_id
    }
}

/// 256 byte values followed by the four specials.
pub const BYTE_VOCAB_SIZE: usize = 260;

/// Byte-level tokenizer: ids 0..=255 are raw bytes, 256..=259 the specials.
#[derive(Debug, Clone, Copy, Default)]
pub struct ByteTokenizer;

impl Tokenizer for ByteTokenizer {
    fn vocab_size(&self) -> usize {
        BYTE_VOCAB_SIZE
    }

    fn specials(&self) -> SpecialTokens {
        SpecialTokens {
            cls_id: 256,
            mask_id: 257,
            pad_id: 258,
            unk_id: 259,
        }
    }

    fn encode_word(&self, word: &str) -> Vec<u32> {
        word.bytes().map(u32::from).collect()
    }

    fn decode(&self, ids: &[u32]) -> String {
        let bytes: Vec<u8> = ids
            .iter()
            .filter(|id| **id < 256)
            .map(|id| *id as u8)
            .collect();
        String::from_utf8_lossy(&bytes).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_roundtrip() {
        let tok = ByteTokenizer;
        let ids = tok.encode_word("Total: 12.40");
        assert_eq!(ids.len(), 12);
        assert_eq!(tok.decode(&ids), "Total: 12.40");
        assert!(ids.iter().all(|id| !tok.is_special(*id)));
    }

    #[test]
    fn specials_are_beyond_bytes() {
        let tok = ByteTokenizer;
        let s = tok.specials();
        for id in [s.cls_id, s.mask_id, s.pad_id, s.unk_id] {
            assert!(id >= 256 && (id as usize) < tok.vocab_size());
            assert!(tok.is_special(id));
        }
    }
}
