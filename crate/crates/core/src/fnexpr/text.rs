//! Text format for maps.
//!
//! ```text
//! expr := real | (const v..) | (coord k) | gamma | lambda | clamp01
//!       | (smash s t) | smashp | div
//!       | (gamma e) | (lambda e) | (clamp01 e) | (smash s t e) | (smashp e) | (div e)
//!       | (compose f g) | (tuple e..) | (sum e..) | (prod e..)
//!       | (affine [[a..] ..] [b..]) | (project k e)
//!       | (piece axis (b..) e..) | (glue (PATTERN e) ..) | (cube e)
//! top  := expr | (map n expr)
//! ```
//!
//! Coordinate, component and axis indices are 1-based. Without a `map`
//! header the input dimension is the smallest one the expression needs.
//! Serialization is canonical: lowercase, single spaces, always with the
//! header, and elementwise maps applied to an argument use the short form.

use super::{Node, SmoothMap};
use crate::cubelat::Face;
use crate::error::{Error, Result};
use crate::kernels::SmashParams;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pos {
    line: usize,
    column: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
    Bracket(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) | Sexp::Bracket(_, p) => *p,
        }
    }
}

fn perr(pos: Pos, message: impl Into<String>) -> Error {
    Error::Parse {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp> {
        self.skip_ws();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Err(perr(start, "unexpected end of input")),
            Some(open @ ('(' | '[')) => {
                self.bump();
                let close = if open == '(' { ')' } else { ']' };
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek().copied() {
                        None => return Err(perr(start, format!("unclosed `{open}`"))),
                        Some(c) if c == close => {
                            self.bump();
                            break;
                        }
                        Some(c @ (')' | ']')) => {
                            return Err(perr(self.pos, format!("mismatched `{c}`")))
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
                Ok(if open == '(' {
                    Sexp::List(items, start)
                } else {
                    Sexp::Bracket(items, start)
                })
            }
            Some(c @ (')' | ']')) => Err(perr(start, format!("unexpected `{c}`"))),
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || "()[];".contains(c) {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom(s, start))
            }
        }
    }
}

fn number(e: &Sexp) -> Result<f64> {
    match e {
        Sexp::Atom(s, p) => match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(perr(*p, format!("expected a finite real, found `{s}`"))),
        },
        other => Err(perr(other.pos(), "expected a real")),
    }
}

fn index(e: &Sexp) -> Result<usize> {
    match e {
        Sexp::Atom(s, p) => match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(perr(*p, format!("expected a 1-based index, found `{s}`"))),
        },
        other => Err(perr(other.pos(), "expected an index")),
    }
}

fn numbers(e: &Sexp) -> Result<Vec<f64>> {
    match e {
        Sexp::List(items, _) | Sexp::Bracket(items, _) => items.iter().map(number).collect(),
        other => Err(perr(other.pos(), "expected a list of reals")),
    }
}

fn head(items: &[Sexp], pos: Pos) -> Result<&str> {
    match items.first() {
        Some(Sexp::Atom(s, _)) => Ok(s),
        Some(other) => Err(perr(other.pos(), "expected an operator name")),
        None => Err(perr(pos, "empty list")),
    }
}

fn arity(items: &[Sexp], pos: Pos, name: &str, n: usize) -> Result<()> {
    if items.len() != n + 1 {
        return Err(perr(
            pos,
            format!("`{name}` takes {n} argument(s), got {}", items.len() - 1),
        ));
    }
    Ok(())
}

const ELEMENTWISE: [&str; 3] = ["gamma", "lambda", "clamp01"];

/// Smallest input dimension the expression needs.
fn needed(e: &Sexp) -> Result<usize> {
    match e {
        Sexp::Atom(s, p) => match s.as_str() {
            "gamma" | "lambda" | "clamp01" => Ok(0),
            "smashp" => Ok(3),
            "div" => Ok(2),
            _ => number(e).map(|_| 0).map_err(|_| perr(*p, format!("unknown atom `{s}`"))),
        },
        Sexp::Bracket(_, p) => Err(perr(*p, "unexpected `[` outside `affine`")),
        Sexp::List(items, pos) => {
            let name = head(items, *pos)?;
            let max_of = |xs: &[Sexp]| -> Result<usize> {
                xs.iter().try_fold(0, |m, x| Ok(m.max(needed(x)?)))
            };
            match name {
                "const" => Ok(0),
                "coord" => {
                    arity(items, *pos, name, 1)?;
                    index(&items[1])
                }
                "map" => {
                    arity(items, *pos, name, 2)?;
                    index(&items[1])
                }
                "gamma" | "lambda" | "clamp01" | "smashp" | "div" | "cube" => {
                    arity(items, *pos, name, 1)?;
                    needed(&items[1])
                }
                "smash" => match items.len() {
                    3 => Ok(0),
                    4 => needed(&items[3]),
                    _ => Err(perr(*pos, "`smash` takes sigma, tau and an optional argument")),
                },
                "compose" => {
                    arity(items, *pos, name, 2)?;
                    needed(&items[2])
                }
                "tuple" | "sum" | "prod" => max_of(&items[1..]),
                "affine" => {
                    arity(items, *pos, name, 2)?;
                    match &items[1] {
                        Sexp::Bracket(rows, _) | Sexp::List(rows, _) => match rows.first() {
                            Some(r) => Ok(numbers(r)?.len()),
                            None => Err(perr(*pos, "empty affine matrix")),
                        },
                        other => Err(perr(other.pos(), "expected a matrix")),
                    }
                }
                "project" => {
                    arity(items, *pos, name, 2)?;
                    needed(&items[2])
                }
                "piece" => {
                    if items.len() < 4 {
                        return Err(perr(*pos, "`piece` needs an axis, breakpoints and pieces"));
                    }
                    Ok(index(&items[1])?.max(max_of(&items[3..])?))
                }
                "glue" => {
                    let mut m = 0;
                    for arm in &items[1..] {
                        let (pat, body) = glue_arm(arm)?;
                        m = m.max(pat.ambient_dim()).max(needed(body)?);
                    }
                    Ok(m)
                }
                other => Err(perr(*pos, format!("unknown operator `{other}`"))),
            }
        }
    }
}

fn glue_arm(arm: &Sexp) -> Result<(Face, &Sexp)> {
    match arm {
        Sexp::List(parts, p) if parts.len() == 2 => match &parts[0] {
            Sexp::Atom(s, fp) => {
                let face = s
                    .parse::<Face>()
                    .map_err(|e| perr(*fp, e.to_string()))?;
                Ok((face, &parts[1]))
            }
            other => Err(perr(other.pos(), "expected a face pattern")),
        },
        other => Err(perr(other.pos(), "glue arms are `(PATTERN expr)`")),
    }
}

fn located(e: Error, what: &str, pos: Pos) -> Error {
    match e {
        Error::Dimension { node, message } if !node.contains(" at ") => Error::Dimension {
            node: if node == what {
                format!("{what} at {pos}")
            } else {
                format!("{what} at {pos} ({node})")
            },
            message,
        },
        other => other,
    }
}

fn elementwise(name: &str, dim: usize) -> SmoothMap {
    match name {
        "gamma" => SmoothMap::gamma(dim),
        "lambda" => SmoothMap::lambda(dim),
        _ => SmoothMap::clamp01(dim),
    }
}

fn smash_params(items: &[Sexp]) -> Result<SmashParams> {
    let (s, t) = (number(&items[1])?, number(&items[2])?);
    SmashParams::new(s, t).map_err(|e| perr(items[1].pos(), e.to_string()))
}

fn build(e: &Sexp, n: usize) -> Result<SmoothMap> {
    match e {
        Sexp::Atom(s, pos) => {
            let r = match s.as_str() {
                name if ELEMENTWISE.contains(&name) => Ok(elementwise(name, n)),
                "smashp" | "div" => {
                    let m = if s == "div" { SmoothMap::div() } else { SmoothMap::smash_dyn() };
                    if m.in_dim() != n {
                        return Err(Error::Dimension {
                            node: format!("{s} at {pos}"),
                            message: format!("takes {} inputs, context supplies {n}", m.in_dim()),
                        });
                    }
                    Ok(m)
                }
                _ => SmoothMap::constant(n, vec![number(e)?]),
            };
            r.map_err(|err| located(err, s, *pos))
        }
        Sexp::Bracket(_, p) => Err(perr(*p, "unexpected `[` outside `affine`")),
        Sexp::List(items, pos) => {
            let name = head(items, *pos)?;
            let sugar = |outer: SmoothMap, arg: &Sexp| -> Result<SmoothMap> {
                let inner = build(arg, n)?;
                let outer = if ELEMENTWISE.contains(&name) || name == "smash" {
                    // elementwise maps adopt the argument's width
                    match outer.node() {
                        Node::Smash(p) => SmoothMap::smash(*p, inner.out_dim()),
                        _ => elementwise(name, inner.out_dim()),
                    }
                } else {
                    outer
                };
                SmoothMap::compose(outer, inner)
            };
            let r = match name {
                "const" => SmoothMap::constant(n, items[1..].iter().map(number).collect::<Result<_>>()?),
                "coord" => SmoothMap::coord(n, index(&items[1])? - 1),
                "map" => {
                    let k = index(&items[1])?;
                    if k != n {
                        return Err(perr(*pos, "`map` header must be outermost"));
                    }
                    build(&items[2], n)
                }
                "gamma" | "lambda" | "clamp01" => sugar(elementwise(name, 1), &items[1]),
                "smashp" => sugar(SmoothMap::smash_dyn(), &items[1]),
                "div" => sugar(SmoothMap::div(), &items[1]),
                "smash" => {
                    let p = smash_params(items)?;
                    if items.len() == 3 {
                        Ok(SmoothMap::smash(p, n))
                    } else {
                        sugar(SmoothMap::smash(p, 1), &items[3])
                    }
                }
                "cube" => Ok(build(&items[1], n)?.on_cube()),
                "compose" => {
                    let inner = build(&items[2], n)?;
                    let outer = build(&items[1], inner.out_dim())?;
                    SmoothMap::compose(outer, inner)
                }
                "tuple" | "sum" | "prod" => {
                    let cs = items[1..].iter().map(|x| build(x, n)).collect::<Result<Vec<_>>>()?;
                    match name {
                        "tuple" => SmoothMap::tuple(cs),
                        "sum" => SmoothMap::sum(cs),
                        _ => SmoothMap::product(cs),
                    }
                }
                "affine" => {
                    let rows = match &items[1] {
                        Sexp::Bracket(rows, _) | Sexp::List(rows, _) => {
                            rows.iter().map(numbers).collect::<Result<Vec<_>>>()?
                        }
                        other => return Err(perr(other.pos(), "expected a matrix")),
                    };
                    let offset = numbers(&items[2])?;
                    let a = SmoothMap::affine(rows, offset).map_err(|e| located(e, name, *pos))?;
                    if a.in_dim() != n {
                        return Err(Error::Dimension {
                            node: format!("affine at {pos}"),
                            message: format!(
                                "matrix has {} columns but the input dimension is {n}",
                                a.in_dim()
                            ),
                        });
                    }
                    Ok(a)
                }
                "project" => {
                    let k = index(&items[1])?;
                    SmoothMap::project(k - 1, build(&items[2], n)?)
                }
                "piece" => {
                    let axis = index(&items[1])? - 1;
                    let breaks = numbers(&items[2])?;
                    let pieces = items[3..].iter().map(|x| build(x, n)).collect::<Result<Vec<_>>>()?;
                    SmoothMap::piecewise(axis, breaks, pieces)
                }
                "glue" => {
                    let mut faces = Vec::new();
                    let mut pieces = Vec::new();
                    for arm in &items[1..] {
                        let (face, body) = glue_arm(arm)?;
                        faces.push(face);
                        pieces.push(build(body, n)?);
                    }
                    SmoothMap::glue(faces, pieces)
                }
                other => return Err(perr(*pos, format!("unknown operator `{other}`"))),
            };
            r.map_err(|err| located(err, name, *pos))
        }
    }
}

/// Parses map text; see the module docs for the grammar.
pub fn parse_map(text: &str) -> Result<SmoothMap> {
    let mut reader = Reader::new(text);
    let expr = reader.read()?;
    reader.skip_ws();
    if reader.chars.peek().is_some() {
        return Err(perr(reader.pos, "trailing input after the expression"));
    }
    let n = needed(&expr)?.max(1);
    build(&expr, n)
}

fn real(v: f64) -> String {
    format!("{v:?}")
}

fn write_expr(f: &SmoothMap, out: &mut String) {
    let list = |out: &mut String, name: &str, children: &[SmoothMap]| {
        out.push('(');
        out.push_str(name);
        for c in children {
            out.push(' ');
            write_expr(c, out);
        }
        out.push(')');
    };
    match f.node() {
        Node::Const(v) => {
            out.push_str("(const");
            for x in v {
                out.push(' ');
                out.push_str(&real(*x));
            }
            out.push(')');
        }
        Node::Coord(k) => out.push_str(&format!("(coord {})", k + 1)),
        Node::Affine { matrix, offset } => {
            out.push_str("(affine [");
            for (i, row) in matrix.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push('[');
                out.push_str(&row.iter().map(|x| real(*x)).collect::<Vec<_>>().join(" "));
                out.push(']');
            }
            out.push_str("] [");
            out.push_str(&offset.iter().map(|x| real(*x)).collect::<Vec<_>>().join(" "));
            out.push_str("])");
        }
        Node::Sum(cs) => list(out, "sum", cs),
        Node::Product(cs) => list(out, "prod", cs),
        Node::Tuple(cs) => list(out, "tuple", cs),
        Node::Compose(outer, inner) => {
            let short = match outer.node() {
                Node::Gamma => Some("gamma".to_string()),
                Node::Lambda => Some("lambda".to_string()),
                Node::Clamp01 => Some("clamp01".to_string()),
                Node::SmashDyn => Some("smashp".to_string()),
                Node::Div => Some("div".to_string()),
                Node::Smash(p) => Some(format!("smash {} {}", real(p.sigma()), real(p.tau()))),
                _ => None,
            };
            match short {
                Some(s) => {
                    out.push('(');
                    out.push_str(&s);
                    out.push(' ');
                    write_expr(inner, out);
                    out.push(')');
                }
                None => list(out, "compose", &[outer.clone(), inner.clone()]),
            }
        }
        Node::Gamma => out.push_str("gamma"),
        Node::Lambda => out.push_str("lambda"),
        Node::Clamp01 => out.push_str("clamp01"),
        Node::SmashDyn => out.push_str("smashp"),
        Node::Div => out.push_str("div"),
        Node::Smash(p) => out.push_str(&format!("(smash {} {})", real(p.sigma()), real(p.tau()))),
        Node::Project(i, c) => {
            out.push_str(&format!("(project {} ", i + 1));
            write_expr(c, out);
            out.push(')');
        }
        Node::Piecewise {
            axis,
            breaks,
            pieces,
        } => {
            out.push_str(&format!("(piece {} (", axis + 1));
            out.push_str(&breaks.iter().map(|x| real(*x)).collect::<Vec<_>>().join(" "));
            out.push(')');
            for p in pieces {
                out.push(' ');
                write_expr(p, out);
            }
            out.push(')');
        }
        Node::Glue { faces, pieces } => {
            out.push_str("(glue");
            for (face, p) in faces.iter().zip(pieces) {
                out.push_str(&format!(" ({face} "));
                write_expr(p, out);
                out.push(')');
            }
            out.push(')');
        }
        Node::Cube(c) => list(out, "cube", std::slice::from_ref(c)),
    }
}

/// Canonical text of a map, headed by its input dimension.
pub fn serialize_map(f: &SmoothMap) -> String {
    let mut out = format!("(map {} ", f.in_dim());
    write_expr(f, &mut out);
    out.push(')');
    out
}
