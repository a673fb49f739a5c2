//! Reference parser for GraphQL executable documents, written directly from
//! the language grammar. Shares no code with the crate under test.

#![allow(dead_code)]

#[derive(Debug, Clone, PartialEq)]
pub enum RValue {
    Variable(String),
    Int(String),
    Float(String),
    Str(String),
    Bool(bool),
    Null,
    Enum(String),
    List(Vec<RValue>),
    Object(Vec<(String, RValue)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RSelection {
    Field {
        alias: Option<String>,
        name: String,
        args: Vec<(String, RValue)>,
        selection: Vec<RSelection>,
    },
    Inline {
        on: Option<String>,
        selection: Vec<RSelection>,
    },
    Spread(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ROperation {
    pub kind: String,
    pub selection: Vec<RSelection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RDocument {
    pub operations: Vec<ROperation>,
    pub fragments: Vec<(String, String, Vec<RSelection>)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Punct(char),
    Spread,
    Name(String),
    Int(String),
    Float(String),
    Str(String),
}

fn is_name_start(c: char) -> bool {
    c == '_' || c.is_ascii_alphabetic()
}

fn is_name_continue(c: char) -> bool {
    c == '_' || c.is_ascii_alphanumeric()
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\u{FEFF}' | ' ' | '\t' | '\n' | '\r' | ',' => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' && chars[i] != '\r' {
                    i += 1;
                }
            }
            '!' | '$' | '&' | '(' | ')' | ':' | '=' | '@' | '[' | ']' | '{' | '|' | '}' => {
                out.push(Tok::Punct(c));
                i += 1;
            }
            '.' => {
                if chars.get(i + 1) == Some(&'.') && chars.get(i + 2) == Some(&'.') {
                    out.push(Tok::Spread);
                    i += 3;
                } else {
                    return Err(format!("lone '.' at {i}"));
                }
            }
            '"' => {
                if chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"') {
                    return Err("block strings are not expected in generated queries".into());
                }
                i += 1;
                let mut s = String::new();
                loop {
                    let Some(&c) = chars.get(i) else {
                        return Err("unterminated string".into());
                    };
                    match c {
                        '"' => {
                            i += 1;
                            break;
                        }
                        '\n' | '\r' => return Err("line terminator in string".into()),
                        c if (c as u32) < 0x20 && c != '\t' => {
                            return Err(format!(
                                "raw control character U+{:04X} in string",
                                c as u32
                            ))
                        }
                        '\\' => {
                            let esc = *chars.get(i + 1).ok_or("dangling escape")?;
                            i += 2;
                            match esc {
                                '"' => s.push('"'),
                                '\\' => s.push('\\'),
                                '/' => s.push('/'),
                                'b' => s.push('\u{8}'),
                                'f' => s.push('\u{c}'),
                                'n' => s.push('\n'),
                                'r' => s.push('\r'),
                                't' => s.push('\t'),
                                'u' => {
                                    let hex: String = chars
                                        .get(i..i + 4)
                                        .ok_or("short \\u escape")?
                                        .iter()
                                        .collect();
                                    if !hex.chars().all(|h| h.is_ascii_hexdigit()) {
                                        return Err(format!("bad \\u escape {hex}"));
                                    }
                                    let code = u32::from_str_radix(&hex, 16).unwrap();
                                    s.push(char::from_u32(code).ok_or("surrogate escape")?);
                                    i += 4;
                                }
                                other => return Err(format!("bad escape \\{other}")),
                            }
                        }
                        c => {
                            s.push(c);
                            i += 1;
                        }
                    }
                }
                out.push(Tok::Str(s));
            }
            c if c == '-' || c.is_ascii_digit() => {
                let start = i;
                if c == '-' {
                    i += 1;
                }
                let int_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == int_start {
                    return Err("'-' without digits".into());
                }
                if chars[int_start] == '0' && i - int_start > 1 {
                    return Err("leading zero".into());
                }
                let mut float = false;
                if chars.get(i) == Some(&'.') {
                    float = true;
                    i += 1;
                    let f = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == f {
                        return Err("empty fraction".into());
                    }
                }
                if matches!(chars.get(i), Some('e') | Some('E')) {
                    float = true;
                    i += 1;
                    if matches!(chars.get(i), Some('+') | Some('-')) {
                        i += 1;
                    }
                    let e = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == e {
                        return Err("empty exponent".into());
                    }
                }
                if chars.get(i).is_some_and(|&c| c == '.' || is_name_start(c)) {
                    return Err("number followed by name or '.'".into());
                }
                let text: String = chars[start..i].iter().collect();
                out.push(if float {
                    Tok::Float(text)
                } else {
                    Tok::Int(text)
                });
            }
            c if is_name_start(c) => {
                let start = i;
                while i < chars.len() && is_name_continue(chars[i]) {
                    i += 1;
                }
                out.push(Tok::Name(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character {other:?} at {i}")),
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<Tok>,
    pos: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected '{c}', found {:?}", self.peek()))
        }
    }

    fn name(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Name(n)) => Ok(n),
            other => Err(format!("expected name, found {other:?}")),
        }
    }

    fn peek_name(&self, n: &str) -> bool {
        matches!(self.peek(), Some(Tok::Name(x)) if x == n)
    }

    fn document(&mut self) -> Result<RDocument, String> {
        let mut doc = RDocument {
            operations: vec![],
            fragments: vec![],
        };
        if self.peek().is_none() {
            return Err("empty document".into());
        }
        while self.peek().is_some() {
            if self.eat('{') {
                self.pos -= 1;
                doc.operations.push(ROperation {
                    kind: "query".into(),
                    selection: self.selection_set()?,
                });
            } else if self.peek_name("fragment") {
                self.pos += 1;
                let name = self.name()?;
                if name == "on" {
                    return Err("fragment cannot be named `on`".into());
                }
                if !self.peek_name("on") {
                    return Err("fragment needs a type condition".into());
                }
                self.pos += 1;
                let on = self.name()?;
                self.directives()?;
                let sel = self.selection_set()?;
                doc.fragments.push((name, on, sel));
            } else {
                let kind = self.name()?;
                if !matches!(kind.as_str(), "query" | "mutation" | "subscription") {
                    return Err(format!("unknown definition `{kind}`"));
                }
                if matches!(self.peek(), Some(Tok::Name(_))) {
                    self.name()?;
                }
                if self.eat('(') {
                    loop {
                        self.expect('$')?;
                        self.name()?;
                        self.expect(':')?;
                        self.type_ref()?;
                        if self.eat('=') {
                            self.value(true)?;
                        }
                        if self.eat(')') {
                            break;
                        }
                    }
                }
                self.directives()?;
                doc.operations.push(ROperation {
                    kind,
                    selection: self.selection_set()?,
                });
            }
        }
        Ok(doc)
    }

    fn type_ref(&mut self) -> Result<(), String> {
        if self.eat('[') {
            self.type_ref()?;
            self.expect(']')?;
        } else {
            self.name()?;
        }
        self.eat('!');
        Ok(())
    }

    fn directives(&mut self) -> Result<(), String> {
        while self.eat('@') {
            self.name()?;
            self.arguments()?;
        }
        Ok(())
    }

    fn selection_set(&mut self) -> Result<Vec<RSelection>, String> {
        self.expect('{')?;
        let mut out = Vec::new();
        while !self.eat('}') {
            if self.peek().is_none() {
                return Err("unterminated selection set".into());
            }
            out.push(self.selection()?);
        }
        if out.is_empty() {
            return Err("empty selection set".into());
        }
        Ok(out)
    }

    fn selection(&mut self) -> Result<RSelection, String> {
        if self.peek() == Some(&Tok::Spread) {
            self.pos += 1;
            if self.peek_name("on") {
                self.pos += 1;
                let on = self.name()?;
                self.directives()?;
                return Ok(RSelection::Inline {
                    on: Some(on),
                    selection: self.selection_set()?,
                });
            }
            if self.peek() == Some(&Tok::Punct('{')) || self.peek() == Some(&Tok::Punct('@')) {
                self.directives()?;
                return Ok(RSelection::Inline {
                    on: None,
                    selection: self.selection_set()?,
                });
            }
            let name = self.name()?;
            self.directives()?;
            return Ok(RSelection::Spread(name));
        }
        let first = self.name()?;
        let (alias, name) = if self.eat(':') {
            (Some(first), self.name()?)
        } else {
            (None, first)
        };
        let args = self.arguments()?;
        self.directives()?;
        let selection = if self.peek() == Some(&Tok::Punct('{')) {
            self.selection_set()?
        } else {
            Vec::new()
        };
        Ok(RSelection::Field {
            alias,
            name,
            args,
            selection,
        })
    }

    fn arguments(&mut self) -> Result<Vec<(String, RValue)>, String> {
        let mut out = Vec::new();
        if !self.eat('(') {
            return Ok(out);
        }
        loop {
            let name = self.name()?;
            self.expect(':')?;
            out.push((name, self.value(false)?));
            if self.eat(')') {
                break;
            }
        }
        if out.is_empty() {
            return Err("empty argument list".into());
        }
        Ok(out)
    }

    fn value(&mut self, constant: bool) -> Result<RValue, String> {
        match self.next() {
            Some(Tok::Punct('$')) if !constant => Ok(RValue::Variable(self.name()?)),
            Some(Tok::Int(s)) => Ok(RValue::Int(s)),
            Some(Tok::Float(s)) => Ok(RValue::Float(s)),
            Some(Tok::Str(s)) => Ok(RValue::Str(s)),
            Some(Tok::Name(n)) => Ok(match n.as_str() {
                "true" => RValue::Bool(true),
                "false" => RValue::Bool(false),
                "null" => RValue::Null,
                _ => RValue::Enum(n),
            }),
            Some(Tok::Punct('[')) => {
                let mut items = Vec::new();
                while !self.eat(']') {
                    if self.peek().is_none() {
                        return Err("unterminated list".into());
                    }
                    items.push(self.value(constant)?);
                }
                Ok(RValue::List(items))
            }
            Some(Tok::Punct('{')) => {
                let mut fields = Vec::new();
                while !self.eat('}') {
                    let name = self.name()?;
                    self.expect(':')?;
                    fields.push((name, self.value(constant)?));
                }
                Ok(RValue::Object(fields))
            }
            other => Err(format!("expected value, found {other:?}")),
        }
    }
}

/// Parse `src` as an executable document.
pub fn parse(src: &str) -> Result<RDocument, String> {
    let mut p = P {
        toks: lex(src)?,
        pos: 0,
    };
    p.document()
}

#[test]
fn oracle_self_check() {
    assert!(parse("{ a }").is_ok());
    assert!(parse("query Q($x: [Int!]! = [1]) { a(x: $x) @skip(if: false) { b ... on T { c } ...F } } fragment F on T { d }").is_ok());
    assert!(parse(r#"{ a(s: "x\u0041\n") }"#).is_ok());
    assert!(parse("{ }").is_err());
    assert!(parse("{ a(x: 01) }").is_err());
    assert!(parse("{ a(x: 1.) }").is_err());
    assert!(parse("{ a(x: \"\u{1}\") }").is_err());
    assert!(parse("{ a(x: \"\\q\") }").is_err());
    assert!(parse("{ a() }").is_err());
    assert!(parse("{ a { b }").is_err());
    match &parse(r#"{ a(s: "\u00e9") }"#).unwrap().operations[0].selection[0] {
        RSelection::Field { args, .. } => assert_eq!(args[0].1, RValue::Str("é".into())),
        other => panic!("{other:?}"),
    }
}
