//! Newick reading and writing. Every non-root node must carry a branch
//! length; leaves must be named, internal names are optional.

use crate::error::TreeError;
use crate::tree::{Tree, TreeBuilder, VertexId};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TreeError> {
        Err(TreeError::Newick {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), TreeError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }

    fn label(&mut self) -> Result<Option<String>, TreeError> {
        match self.peek() {
            Some(b'\'') => {
                self.pos += 1;
                let mut out = String::new();
                loop {
                    match self.src.get(self.pos) {
                        None => return self.err("unterminated quoted label"),
                        Some(b'\'') if self.src.get(self.pos + 1) == Some(&b'\'') => {
                            out.push('\'');
                            self.pos += 2;
                        }
                        Some(b'\'') => {
                            self.pos += 1;
                            break;
                        }
                        Some(&c) => {
                            out.push(c as char);
                            self.pos += 1;
                        }
                    }
                }
                Ok(Some(out))
            }
            _ => {
                let start = self.pos;
                while let Some(&c) = self.src.get(self.pos) {
                    if b"(),:;[".contains(&c) || c.is_ascii_whitespace() {
                        break;
                    }
                    self.pos += 1;
                }
                if start == self.pos {
                    Ok(None)
                } else {
                    let raw = std::str::from_utf8(&self.src[start..self.pos])
                        .map_err(|_| TreeError::Newick {
                            pos: start,
                            msg: "label is not UTF-8".into(),
                        })?;
                    Ok(Some(raw.to_owned()))
                }
            }
        }
    }

    fn length(&mut self) -> Result<Option<f64>, TreeError> {
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() || b"+-.eE".contains(&c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let raw = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match raw.parse::<f64>() {
            Ok(v) => Ok(Some(v)),
            Err(_) => self.err(format!("bad branch length `{raw}`")),
        }
    }

    fn skip_comment(&mut self) -> Result<(), TreeError> {
        if self.peek() == Some(b'[') {
            while let Some(&c) = self.src.get(self.pos) {
                self.pos += 1;
                if c == b']' {
                    return Ok(());
                }
            }
            return self.err("unterminated comment");
        }
        Ok(())
    }

    /// Parses the subtree below `parent`.
    fn subtree(&mut self, b: &mut TreeBuilder, parent: VertexId) -> Result<(), TreeError> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                // parse into a placeholder vertex that gets its length later
                let v = b.add_child(parent, None, 1.0)?;
                self.node_body(b, v)?;
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.err("expected `,` or `)`"),
                }
            }
        }
        Ok(())
    }

    fn node_body(&mut self, b: &mut TreeBuilder, v: VertexId) -> Result<(), TreeError> {
        let internal = self.peek() == Some(b'(');
        self.subtree(b, v)?;
        self.skip_comment()?;
        let name = self.label()?;
        self.skip_comment()?;
        let start = self.pos;
        let len = match self.length()? {
            Some(l) => l,
            None => {
                self.pos = start;
                return self.err("missing branch length");
            }
        };
        self.skip_comment()?;
        if !internal && name.is_none() {
            return self.err("leaf without a name");
        }
        if !(len > 0.0 && len.is_finite()) {
            return Err(TreeError::NonPositiveLength(len));
        }
        b.set_name_and_length(v, name, len);
        Ok(())
    }

    fn tree(&mut self) -> Result<Tree, TreeError> {
        let mut b = TreeBuilder::new();
        if self.peek() != Some(b'(') {
            return self.err("a tree must start with `(`");
        }
        self.subtree(&mut b, 0)?;
        self.skip_comment()?;
        let name = self.label()?;
        // a root length is allowed and ignored
        self.length()?;
        self.skip_comment()?;
        self.expect(b';')?;
        b.set_name_and_length(0, name, 0.0);
        b.build()
    }
}

/// Parses a single tree.
pub fn parse_newick(text: &str) -> Result<Tree, TreeError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let t = p.tree()?;
    if p.peek().is_some() {
        return p.err("trailing input after `;`");
    }
    Ok(t)
}

/// Parses every `;`-terminated tree in `text` (one family per file).
pub fn parse_newick_many(text: &str) -> Result<Vec<Tree>, TreeError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.tree()?);
    }
    Ok(out)
}

fn write_label(out: &mut String, name: &str) {
    if name
        .bytes()
        .any(|c| b"(),:;[]' ".contains(&c) || c.is_ascii_whitespace())
    {
        out.push('\'');
        out.push_str(&name.replace('\'', "''"));
        out.push('\'');
    } else {
        out.push_str(name);
    }
}

fn write_node(t: &Tree, v: VertexId, out: &mut String) {
    if !t.is_leaf(v) {
        out.push('(');
        for (i, &c) in t.children(v).iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_node(t, c, out);
        }
        out.push(')');
    }
    if let Some(n) = t.name(v) {
        write_label(out, n);
    }
    if t.parent(v).is_some() {
        out.push(':');
        out.push_str(&format!("{}", t.length(v)));
    }
}

/// Serializes a tree; branch lengths use Rust's shortest round-trip form.
pub fn to_newick(t: &Tree) -> String {
    let mut out = String::new();
    write_node(t, t.root(), &mut out);
    out.push(';');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pinched_star() {
        let t = parse_newick("((a:0.5,b:0.5,c:0.5)v:0.5)root;").unwrap();
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(t.shared_path_length("a", "c").unwrap(), 0.5);
        assert_eq!(t.leaf_depth("b").unwrap(), 1.0);
        assert_eq!(t.name(t.root()), Some("root"));
    }

    #[test]
    fn round_trips() {
        let src = "((x:0.25,'odd name':0.75):0.5,y:1e-3);";
        let t = parse_newick(src).unwrap();
        let again = parse_newick(&to_newick(&t)).unwrap();
        assert!(t.same_shape(&again, 0.0));
        assert!(again.leaf("odd name").is_ok());
    }

    #[test]
    fn rejects_missing_lengths_and_names() {
        assert!(matches!(
            parse_newick("(a,b:1);"),
            Err(TreeError::Newick { .. })
        ));
        assert!(matches!(
            parse_newick("(:1,b:1);"),
            Err(TreeError::Newick { .. })
        ));
        assert_eq!(
            parse_newick("(a:0,b:1);").unwrap_err(),
            TreeError::NonPositiveLength(0.0)
        );
        assert!(parse_newick("(a:1,b:1)").is_err());
    }

    #[test]
    fn parses_many() {
        let trees = parse_newick_many("(a:1);\n(a:1,b:1);\n").unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[1].leaf_count(), 2);
    }
}
