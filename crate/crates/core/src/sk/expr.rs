use std::fmt;

use thiserror::Error;

/// An SK-calculus term. Variables are free symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExprNode {
    S,
    K,
    Var(String),
    App(Box<ExprNode>, Box<ExprNode>),
}

impl ExprNode {
    pub fn var(name: &str) -> Self {
        ExprNode::Var(name.to_string())
    }

    pub fn app(f: ExprNode, a: ExprNode) -> Self {
        ExprNode::App(Box::new(f), Box::new(a))
    }

    /// Node count.
    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            n += 1;
            if let ExprNode::App(f, a) = e {
                stack.push(f);
                stack.push(a);
            }
        }
        n
    }

    pub fn depth(&self) -> usize {
        match self {
            ExprNode::App(f, a) => 1 + f.depth().max(a.depth()),
            _ => 1,
        }
    }

    /// Head and arguments of the application spine, arguments in order.
    pub fn unwind(&self) -> (&ExprNode, Vec<&ExprNode>) {
        let mut args = Vec::new();
        let mut h = self;
        while let ExprNode::App(f, a) = h {
            args.push(a.as_ref());
            h = f;
        }
        args.reverse();
        (h, args)
    }

    fn rebuild(head: ExprNode, args: impl IntoIterator<Item = ExprNode>) -> ExprNode {
        args.into_iter().fold(head, ExprNode::app)
    }
}

impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::S => write!(f, "S"),
            ExprNode::K => write!(f, "K"),
            ExprNode::Var(v) => write!(f, "{v}"),
            ExprNode::App(l, r) => {
                write!(f, "{l} ")?;
                if matches!(**r, ExprNode::App(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty expression at position {pos}")]
    Empty { pos: usize },
    #[error("unclosed '(' opened at position {pos}")]
    Unclosed { pos: usize },
    #[error("unmatched ')' at position {pos}")]
    Unmatched { pos: usize },
    #[error("illegal character {ch:?} at position {pos}")]
    Illegal { pos: usize, ch: char },
}

/// Parse concrete syntax: `S`, `K`, lowercase identifiers, parentheses;
/// application is juxtaposition and associates to the left.
pub fn parse(text: &str) -> Result<ExprNode, ParseError> {
    // each frame: (open paren position, accumulated application)
    let mut stack: Vec<(usize, Option<ExprNode>)> = vec![(0, None)];
    let push = |stack: &mut Vec<(usize, Option<ExprNode>)>, e: ExprNode| {
        let top = &mut stack.last_mut().unwrap().1;
        *top = Some(match top.take() {
            None => e,
            Some(f) => ExprNode::app(f, e),
        });
    };
    let mut chars = text.char_indices().peekable();
    while let Some((pos, ch)) = chars.next() {
        match ch {
            c if c.is_whitespace() => {}
            '(' => stack.push((pos, None)),
            ')' => {
                if stack.len() == 1 {
                    return Err(ParseError::Unmatched { pos });
                }
                let (_, inner) = stack.pop().unwrap();
                let e = inner.ok_or(ParseError::Empty { pos })?;
                push(&mut stack, e);
            }
            'S' => push(&mut stack, ExprNode::S),
            'K' => push(&mut stack, ExprNode::K),
            c if c.is_ascii_lowercase() => {
                let mut name = String::from(c);
                while let Some(&(_, n)) = chars.peek() {
                    if n.is_ascii_lowercase() || n.is_ascii_digit() || n == '_' {
                        name.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                push(&mut stack, ExprNode::Var(name));
            }
            c => return Err(ParseError::Illegal { pos, ch: c }),
        }
    }
    if stack.len() > 1 {
        return Err(ParseError::Unclosed {
            pos: stack.last().unwrap().0,
        });
    }
    stack.pop().unwrap().1.ok_or(ParseError::Empty { pos: text.len() })
}

/// Result of sequential reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    NormalForm { expr: ExprNode, steps: usize },
    StepLimit { steps: usize },
}

impl Reduction {
    pub fn normal_form(&self) -> Option<&ExprNode> {
        match self {
            Reduction::NormalForm { expr, .. } => Some(expr),
            Reduction::StepLimit { .. } => None,
        }
    }
}

/// Terms larger than this are treated as runaway.
const ORACLE_MAX_SIZE: usize = 4096;

/// Leftmost-outermost reduction with `K x y -> x` and `S x y z -> x z (y z)`.
pub fn reduce_oracle(expr: &ExprNode, max_steps: usize) -> Reduction {
    let mut e = expr.clone();
    let mut steps = 0;
    loop {
        match step(&e) {
            None => return Reduction::NormalForm { expr: e, steps },
            Some(next) => {
                if steps == max_steps || next.size() > ORACLE_MAX_SIZE {
                    return Reduction::StepLimit { steps };
                }
                steps += 1;
                e = next;
            }
        }
    }
}

/// One normal-order step, or `None` if `e` is in normal form.
fn step(e: &ExprNode) -> Option<ExprNode> {
    let (head, args) = e.unwind();
    match head {
        ExprNode::K if args.len() >= 2 => Some(ExprNode::rebuild(
            args[0].clone(),
            args[2..].iter().map(|a| (*a).clone()),
        )),
        ExprNode::S if args.len() >= 3 => {
            let (x, y, z) = (args[0].clone(), args[1].clone(), args[2].clone());
            let contractum = ExprNode::app(ExprNode::app(x, z.clone()), ExprNode::app(y, z));
            Some(ExprNode::rebuild(contractum, args[3..].iter().map(|a| (*a).clone())))
        }
        _ => {
            for i in 0..args.len() {
                if let Some(reduced) = step(args[i]) {
                    let new_args = args
                        .iter()
                        .enumerate()
                        .map(|(j, a)| if j == i { reduced.clone() } else { (*a).clone() });
                    return Some(ExprNode::rebuild(head.clone(), new_args));
                }
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ExprNode {
        parse(s).unwrap()
    }

    fn nf(s: &str) -> String {
        reduce_oracle(&p(s), 200).normal_form().unwrap().to_string()
    }

    #[test]
    fn parse_leaf() {
        assert_eq!(p("K"), ExprNode::K);
    }

    #[test]
    fn application_associates_left() {
        let e = p("S x y z");
        let expected = ExprNode::app(
            ExprNode::app(ExprNode::app(ExprNode::S, ExprNode::var("x")), ExprNode::var("y")),
            ExprNode::var("z"),
        );
        assert_eq!(e, expected);
        assert_eq!(p("((S x) y) z"), expected);
    }

    #[test]
    fn duplicate_subtrees_are_structurally_equal() {
        let ExprNode::App(l, r) = p("(f x) (f x)") else {
            panic!("expected application")
        };
        assert_eq!(l, r);
        assert_eq!(*l, ExprNode::app(ExprNode::var("f"), ExprNode::var("x")));
    }

    #[test]
    fn print_round_trip() {
        for s in ["K", "S x y z", "x z (y z)", "S (K a) (S K K) b", "f (g (h x)) y", "(K)"] {
            let e = p(s);
            assert_eq!(p(&e.to_string()), e, "{s}");
        }
        assert_eq!(p("  ( S   K ) K a ").to_string(), "S K K a");
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(parse(""), Err(ParseError::Empty { pos: 0 }));
        assert_eq!(parse("   "), Err(ParseError::Empty { pos: 3 }));
        assert_eq!(parse("S (K a"), Err(ParseError::Unclosed { pos: 2 }));
        assert_eq!(parse("S a)"), Err(ParseError::Unmatched { pos: 3 }));
        assert_eq!(parse("S ()"), Err(ParseError::Empty { pos: 3 }));
        assert_eq!(parse("S X"), Err(ParseError::Illegal { pos: 2, ch: 'X' }));
    }

    #[test]
    fn reduction_rules() {
        assert_eq!(nf("K a b"), "a");
        assert_eq!(nf("S x y z"), "x z (y z)");
        assert_eq!(nf("S K K a"), "a");
        assert_eq!(reduce_oracle(&p("S K K a"), 10), Reduction::NormalForm { expr: p("a"), steps: 2 });
    }

    #[test]
    fn normal_order_skips_discarded_divergence() {
        // K a (S S S (S S S)) would diverge if the argument were reduced first
        let omega = "(S I I (S I I))".replace('I', "(S K K)");
        assert_eq!(nf(&format!("K a {omega}")), "a");
        assert!(matches!(reduce_oracle(&p(&omega), 50), Reduction::StepLimit { .. }));
    }

    #[test]
    fn zero_budget() {
        assert_eq!(reduce_oracle(&p("K a b"), 0), Reduction::StepLimit { steps: 0 });
        assert_eq!(reduce_oracle(&p("a b"), 0), Reduction::NormalForm { expr: p("a b"), steps: 0 });
    }
}
