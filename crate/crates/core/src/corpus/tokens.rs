//! Text normalization shared by the alias index and the scanner.
//!
//! Tokens are maximal runs of alphanumeric characters (Unicode-aware),
//! lowercased. Surfaces are matched as whole-token sequences, so "Rose" can
//! never hit inside "Roseanne".

/// Split `text` into lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lower in ch.to_lowercase() {
                current.push(lower);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Normalize an alias surface to its token sequence.
pub fn normalize_surface(surface: &str) -> Vec<String> {
    tokenize(surface)
}

/// Tokens of one document section joined by single spaces, with the byte
/// offset of each token recorded so matcher spans map back to token indices.
#[derive(Debug, Clone)]
pub(crate) struct JoinedTokens {
    pub text: String,
    pub starts: Vec<usize>,
}

impl JoinedTokens {
    pub fn from_text(text: &str) -> Self {
        Self::from_tokens(&tokenize(text))
    }

    pub fn from_tokens(tokens: &[String]) -> Self {
        let mut text = String::new();
        let mut starts = Vec::with_capacity(tokens.len());
        for token in tokens {
            if !text.is_empty() {
                text.push(' ');
            }
            starts.push(text.len());
            text.push_str(token);
        }
        JoinedTokens { text, starts }
    }

    /// Whether the byte span `[start, end)` begins and ends on token
    /// boundaries of the joined text.
    pub fn on_token_boundary(&self, start: usize, end: usize) -> bool {
        let bytes = self.text.as_bytes();
        let left_ok = start == 0 || bytes[start - 1] == b' ';
        let right_ok = end == self.text.len() || bytes[end] == b' ';
        left_ok && right_ok
    }

    /// Token index whose byte offset is exactly `start`.
    pub fn token_at(&self, start: usize) -> usize {
        self.starts
            .binary_search(&start)
            .expect("span start must be a token boundary")
    }
}
