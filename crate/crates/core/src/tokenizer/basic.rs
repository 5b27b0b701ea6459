/// A lowercased word with its character range in the original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Lowercases one character while keeping a one-to-one character mapping,
/// so offsets into the lowercased word are offsets into the source.
pub(crate) fn lower_char(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

fn joins_word(prev: Option<char>, c: char, next: Option<char>) -> bool {
    match c {
        '-' => {
            prev.is_some_and(char::is_alphanumeric) && next.is_some_and(char::is_alphanumeric)
        }
        '.' | ',' => {
            prev.is_some_and(|p| p.is_ascii_digit()) && next.is_some_and(|n| n.is_ascii_digit())
        }
        _ => false,
    }
}

/// Splits text into lowercased words.
///
/// Whitespace separates words. Every other non-alphanumeric character is a
/// word of its own, except a hyphen between two alphanumerics (`er-positive`)
/// and a decimal point or comma between two digits (`1.0`).
pub fn basic_tokenize(text: &str) -> Vec<Word> {
    let chars: Vec<char> = text.chars().collect();
    let mut words = Vec::new();
    let mut current = String::new();
    let mut start = 0;

    let flush = |current: &mut String, start: usize, end: usize, words: &mut Vec<Word>| {
        if !current.is_empty() {
            words.push(Word {
                text: std::mem::take(current),
                start,
                end,
            });
        }
    };

    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|p| chars[p]);
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() || c.is_control() {
            flush(&mut current, start, i, &mut words);
        } else if c.is_alphanumeric() || joins_word(prev, c, next) {
            if current.is_empty() {
                start = i;
            }
            current.push(lower_char(c));
        } else {
            flush(&mut current, start, i, &mut words);
            words.push(Word {
                text: lower_char(c).to_string(),
                start: i,
                end: i + 1,
            });
        }
    }
    flush(&mut current, start, chars.len(), &mut words);
    words
}
