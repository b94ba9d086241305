//! A small reader for the subset of DOT produced by the exporter: one
//! (optionally strict) graph or digraph with node, edge and attribute
//! statements. Comments and quoted IDs follow the DOT grammar.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotEdge {
    pub from: String,
    pub to: String,
    pub attrs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DotGraph {
    pub strict: bool,
    pub directed: bool,
    pub name: Option<String>,
    pub nodes: Vec<(String, Vec<(String, String)>)>,
    pub edges: Vec<DotEdge>,
    pub graph_attrs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    Sym(char),
    EdgeOp(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let c: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line_start = true;
    while i < c.len() {
        let ch = c[i];
        if ch == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if line_start && ch == '#' {
            while i < c.len() && c[i] != '\n' {
                i += 1;
            }
            continue;
        }
        line_start = false;
        if ch == '/' && c.get(i + 1) == Some(&'/') {
            while i < c.len() && c[i] != '\n' {
                i += 1;
            }
        } else if ch == '/' && c.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < c.len() && !(c[i] == '*' && c[i + 1] == '/') {
                i += 1;
            }
            if i + 1 >= c.len() {
                return Err("unterminated comment".into());
            }
            i += 2;
        } else if ch == '-' && matches!(c.get(i + 1), Some('-') | Some('>')) {
            out.push(Tok::EdgeOp(if c[i + 1] == '-' { "--" } else { "->" }));
            i += 2;
        } else if "{}[];,=:".contains(ch) {
            out.push(Tok::Sym(ch));
            i += 1;
        } else if ch == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match c.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') if c.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some('\\') if c.get(i + 1) == Some(&'\\') => {
                        s.push('\\');
                        i += 2;
                    }
                    Some(&x) => {
                        s.push(x);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(Tok::Id(s));
        } else if ch.is_alphanumeric() || ch == '_' || ch == '.' || ch == '-' {
            let start = i;
            while i < c.len() && (c[i].is_alphanumeric() || c[i] == '_' || c[i] == '.' || (c[i] == '-' && start == i)) {
                i += 1;
            }
            out.push(Tok::Id(c[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character `{}`", ch));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, s: char) -> Result<(), String> {
        match self.next() {
            Some(Tok::Sym(c)) if c == s => Ok(()),
            other => Err(format!("expected `{}`, found {:?}", s, other)),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            other => Err(format!("expected identifier, found {:?}", other)),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Id(s)) if s.eq_ignore_ascii_case(kw)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn attr_list(&mut self) -> Result<Vec<(String, String)>, String> {
        let mut attrs = Vec::new();
        while self.peek() == Some(&Tok::Sym('[')) {
            self.pos += 1;
            while self.peek() != Some(&Tok::Sym(']')) {
                let k = self.id()?;
                self.expect_sym('=')?;
                let v = self.id()?;
                attrs.push((k, v));
                if matches!(self.peek(), Some(Tok::Sym(',')) | Some(Tok::Sym(';'))) {
                    self.pos += 1;
                }
            }
            self.expect_sym(']')?;
        }
        Ok(attrs)
    }
}

pub fn parse_dot(src: &str) -> Result<DotGraph, String> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let mut g = DotGraph { strict: p.keyword("strict"), ..Default::default() };
    g.directed = if p.keyword("digraph") {
        true
    } else if p.keyword("graph") {
        false
    } else {
        return Err("expected `graph` or `digraph`".into());
    };
    if let Some(Tok::Id(_)) = p.peek() {
        g.name = Some(p.id()?);
    }
    p.expect_sym('{')?;
    loop {
        match p.peek() {
            Some(Tok::Sym('}')) => {
                p.pos += 1;
                break;
            }
            Some(Tok::Sym(';')) => {
                p.pos += 1;
            }
            None => return Err("unexpected end of input".into()),
            _ => {
                if p.keyword("graph") || p.keyword("node") || p.keyword("edge") {
                    let attrs = p.attr_list()?;
                    g.graph_attrs.extend(attrs);
                    continue;
                }
                let first = p.id()?;
                if p.peek() == Some(&Tok::Sym('=')) {
                    p.pos += 1;
                    let v = p.id()?;
                    g.graph_attrs.push((first, v));
                    continue;
                }
                let mut chain = vec![first];
                while let Some(Tok::EdgeOp(op)) = p.peek().cloned() {
                    if (op == "->") != g.directed {
                        return Err(format!("edge operator `{}` does not match graph kind", op));
                    }
                    p.pos += 1;
                    chain.push(p.id()?);
                }
                let attrs = p.attr_list()?;
                if chain.len() == 1 {
                    g.nodes.push((chain.pop().unwrap(), attrs));
                } else {
                    for w in chain.windows(2) {
                        g.edges.push(DotEdge { from: w[0].clone(), to: w[1].clone(), attrs: attrs.clone() });
                    }
                }
            }
        }
    }
    if p.pos != p.toks.len() {
        return Err("trailing input after graph".into());
    }
    Ok(g)
}
