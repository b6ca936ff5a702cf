use std::fmt;
use std::path::{Path, PathBuf};

/// Inclusive character span: `start` is the offset of the first character and
/// `end` the offset of the last one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start, other.end)
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains_offset(&self, offset: usize) -> bool {
        self.start <= offset && offset <= self.end
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}..={}", self.start, self.end)
    }
}

/// A source file addressed by character offsets.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
    pub line_starts: Vec<usize>,
    chars: Vec<char>,
    byte_offsets: Vec<usize>,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        let text = text.into();
        let mut chars = Vec::with_capacity(text.len());
        let mut byte_offsets = Vec::with_capacity(text.len() + 1);
        let mut line_starts = vec![0];
        for (i, (b, c)) in text.char_indices().enumerate() {
            chars.push(c);
            byte_offsets.push(b);
            if c == '\n' {
                line_starts.push(i + 1);
            }
        }
        byte_offsets.push(text.len());
        SourceFile {
            path: path.into(),
            text,
            line_starts,
            chars,
            byte_offsets,
        }
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(SourceFile::new(path, text))
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len_chars(&self) -> usize {
        self.chars.len()
    }

    pub fn byte_offset(&self, char_offset: usize) -> usize {
        self.byte_offsets[char_offset.min(self.chars.len())]
    }

    /// Text of an inclusive span.
    pub fn slice(&self, span: Span) -> &str {
        &self.text[self.byte_offset(span.start)..self.byte_offset(span.end + 1)]
    }

    /// Zero-based line index containing `offset`.
    pub fn line_of(&self, offset: usize) -> usize {
        match self.line_starts.binary_search(&offset) {
            Ok(line) => line,
            Err(next) => next - 1,
        }
    }

    /// One-based (line, column) for diagnostics.
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let line = self.line_of(offset);
        (line + 1, offset - self.line_starts[line] + 1)
    }

    /// Leading whitespace of the line that contains `offset`.
    pub fn indentation_at(&self, offset: usize) -> String {
        let line = self.line_of(offset);
        self.chars[self.line_starts[line]..]
            .iter()
            .take_while(|c| **c == ' ' || **c == '\t')
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_starts_and_positions() {
        let src = SourceFile::new("a.java", "ab\ncd\n\nx");
        assert_eq!(src.line_starts, vec![0, 3, 6, 7]);
        assert_eq!(src.line_col(4), (2, 2));
        assert_eq!(src.line_of(6), 2);
        assert_eq!(src.slice(Span::new(3, 4)), "cd");
    }

    #[test]
    fn char_offsets_with_multibyte_text() {
        let src = SourceFile::new("a.java", "é = \"ü\";");
        assert_eq!(src.len_chars(), 8);
        assert_eq!(src.slice(Span::new(4, 6)), "\"ü\"");
    }
}
