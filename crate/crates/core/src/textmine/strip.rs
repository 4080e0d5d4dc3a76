/// Result of stripping one block of source lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stripped {
    pub lines: Vec<String>,
    /// Comments or literals still open at the end of the block.
    pub unterminated: u32,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Code,
    LineComment,
    BlockComment,
    Literal(char),
}

/// Removes `//` and `/* */` comments and the full text of string and
/// character literals (quotes included). The block is treated as one
/// continuous text, so comments may span lines; line structure is kept.
/// Code outside the removed spans is left untouched, except that a single
/// space separates a `/` from a following `/` or `*` brought next to it by a
/// removal, so stripping twice changes nothing.
pub fn strip_comments_and_strings<S: AsRef<str>>(lines: &[S]) -> Stripped {
    let text: Vec<char> = lines
        .iter()
        .enumerate()
        .flat_map(|(i, l)| {
            let sep = (i > 0).then_some('\n');
            sep.into_iter().chain(l.as_ref().chars())
        })
        .collect();

    let mut out = String::with_capacity(text.len());
    let mut state = State::Code;
    let mut removed = false;
    let mut i = 0;
    while i < text.len() {
        let c = text[i];
        let next = text.get(i + 1).copied();
        match state {
            State::Code => match (c, next) {
                ('/', Some('/')) => {
                    state = State::LineComment;
                    removed = true;
                    i += 2;
                    continue;
                }
                ('/', Some('*')) => {
                    state = State::BlockComment;
                    removed = true;
                    i += 2;
                    continue;
                }
                ('"' | '\'', _) => {
                    state = State::Literal(c);
                    removed = true;
                }
                _ => {
                    if removed && c != '\n' && (c == '/' || c == '*') && out.ends_with('/') {
                        out.push(' ');
                    }
                    if c != '\n' {
                        removed = false;
                    }
                    out.push(c);
                }
            },
            State::LineComment => {
                if c == '\n' {
                    state = State::Code;
                    out.push(c);
                }
            }
            State::BlockComment => {
                if c == '*' && next == Some('/') {
                    state = State::Code;
                    i += 2;
                    continue;
                }
                if c == '\n' {
                    out.push(c);
                }
            }
            State::Literal(q) => {
                if c == '\\' {
                    if next == Some('\n') {
                        out.push('\n');
                    }
                    i += 2;
                    continue;
                }
                if c == q {
                    state = State::Code;
                } else if c == '\n' {
                    out.push(c);
                }
            }
        }
        i += 1;
    }
    let unterminated = u32::from(matches!(state, State::BlockComment | State::Literal(_)));
    let no_input = lines.is_empty();
    let mut lines: Vec<String> = out.split('\n').map(str::to_string).collect();
    if no_input {
        lines.clear();
    }
    Stripped { lines, unterminated }
}
