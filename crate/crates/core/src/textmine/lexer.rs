use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    Arithmetic,
    Comparison,
    Conditional,
    Loop,
    Assignment,
    Logical,
    MemoryAccess,
    Other,
}

impl TokenClass {
    pub const ALL: [TokenClass; 8] = [
        TokenClass::Arithmetic,
        TokenClass::Comparison,
        TokenClass::Conditional,
        TokenClass::Loop,
        TokenClass::Assignment,
        TokenClass::Logical,
        TokenClass::MemoryAccess,
        TokenClass::Other,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// Punctuators, longest first within each leading character.
pub const PUNCTUATORS: &[&str] = &[
    ">>=", "<<=", "->*", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "::", "##", ".*", "+", "-", "*", "/", "%", "<",
    ">", "=", "!", "&", "|", "^", "~", "?", ":", ".", ",", ";", "(", ")", "[", "]", "{", "}", "#",
];

const OTHER_KEYWORDS: &[&str] = &[
    "alignas", "alignof", "asm", "auto", "bool", "break", "catch", "char", "char16_t", "char32_t",
    "char8_t", "class", "const", "const_cast", "consteval", "constexpr", "constinit", "continue",
    "decltype", "default", "delete", "double", "dynamic_cast", "enum", "explicit", "export",
    "extern", "false", "float", "friend", "goto", "inline", "int", "long", "mutable", "namespace",
    "new", "noexcept", "nullptr", "operator", "private", "protected", "public", "register",
    "reinterpret_cast", "restrict", "return", "short", "signed", "sizeof", "static",
    "static_assert", "static_cast", "struct", "template", "this", "thread_local", "throw", "true",
    "try", "typedef", "typeid", "typename", "union", "unsigned", "using", "virtual", "void",
    "volatile", "wchar_t", "_Alignas", "_Alignof", "_Atomic", "_Bool", "_Complex", "_Generic",
    "_Noreturn", "_Static_assert", "_Thread_local",
];

/// Class of an operator or keyword; `None` for identifiers.
pub fn class_of(token: &str) -> Option<TokenClass> {
    use TokenClass::*;
    let class = match token {
        "+" | "-" | "*" | "/" | "%" | "++" | "--" => Arithmetic,
        "==" | "!=" | "<" | ">" | "<=" | ">=" | "&&" | "||" | "!" => Comparison,
        "if" | "else" | "switch" | "case" | "?" | ":" => Conditional,
        "for" | "while" | "do" => Loop,
        "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "<<=" | ">>=" | "&=" | "|=" | "^=" => Assignment,
        "&" | "|" | "^" | "~" | "<<" | ">>" => Logical,
        "->" | "." | "[" | "]" => MemoryAccess,
        t if PUNCTUATORS.contains(&t) || OTHER_KEYWORDS.contains(&t) => Other,
        _ => return None,
    };
    Some(class)
}

/// Longest punctuator starting at the front of `s`.
pub fn munch(s: &[u8]) -> Option<&'static str> {
    (1..=3)
        .rev()
        .filter(|&n| n <= s.len())
        .find_map(|n| PUNCTUATORS.iter().copied().find(|p| p.as_bytes() == &s[..n]))
}

/// Operator and keyword tokens of stripped source text, maximal munch.
/// Identifiers and numeric literals are skipped.
pub fn tokens(src: &str) -> Vec<&str> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            if class_of(word).is_some() {
                out.push(word);
            }
        } else if c.is_ascii_digit() || (c == b'.' && b.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            // pp-number: digits, letters, dots and signed exponents.
            i += 1;
            while i < b.len() {
                let d = b[i];
                let signed_exp = matches!(d, b'+' | b'-') && matches!(b[i - 1], b'e' | b'E' | b'p' | b'P');
                if signed_exp || d.is_ascii_alphanumeric() || d == b'_' || d == b'.' {
                    i += 1;
                } else {
                    break;
                }
            }
        } else if let Some(p) = munch(&b[i..]) {
            out.push(&src[i..i + p.len()]);
            i += p.len();
        } else {
            // whitespace and anything outside the C character set
            i += src[i..].chars().next().map_or(1, char::len_utf8);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts([u64; 8]);

impl TokenCounts {
    pub fn get(&self, class: TokenClass) -> u64 {
        self.0[class.index()]
    }

    pub fn add(&mut self, class: TokenClass, n: u64) {
        self.0[class.index()] += n;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn merge(&mut self, other: &TokenCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

/// Counts classified tokens across already-stripped lines.
pub fn classify_tokens<S: AsRef<str>>(lines: &[S]) -> TokenCounts {
    let mut counts = TokenCounts::default();
    for line in lines {
        for t in tokens(line.as_ref()) {
            if let Some(c) = class_of(t) {
                counts.add(c, 1);
            }
        }
    }
    counts
}
