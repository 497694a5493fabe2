//! Display implementations. The printed form of a formula parses back to a
//! structurally identical tree, which pins down every parenthesization rule:
//! `&` binds tighter than `|`, both chains are left-associative, and a
//! quantifier body extends as far right as possible.

use super::{Atom, Formula, Literal, Term};
use std::fmt;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(l, r) => write!(f, "{l} = {r}"),
            Atom::Rel(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Atom::Dep(dets, det) => {
                write!(f, "=(")?;
                for d in dets {
                    write!(f, "{d},")?;
                }
                write!(f, "{det})")
            }
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            match self.atom {
                // A bare `!x = y` would read ambiguously; parenthesize.
                Atom::Eq(..) => write!(f, "!({})", self.atom),
                _ => write!(f, "!{}", self.atom),
            }
        }
    }
}

/// Context levels ordered loosest to tightest. A node prints bare only in a
/// context at least as loose as its own level.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Ctx {
    Top = 0,
    Or = 1,
    And = 2,
    Unit = 3,
}

fn level(f: &Formula) -> Ctx {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => Ctx::Top,
        Formula::Or(..) => Ctx::Or,
        Formula::And(..) => Ctx::And,
        Formula::Lit(_) => Ctx::Unit,
    }
}

fn fmt_at(f: &Formula, ctx: Ctx, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(f) < ctx {
        write!(out, "(")?;
        fmt_at(f, Ctx::Top, out)?;
        return write!(out, ")");
    }
    match f {
        Formula::Lit(l) => write!(out, "{l}"),
        Formula::Or(l, r) => {
            fmt_at(l, Ctx::Or, out)?;
            write!(out, " | ")?;
            fmt_at(r, Ctx::And, out)
        }
        Formula::And(l, r) => {
            fmt_at(l, Ctx::And, out)?;
            write!(out, " & ")?;
            fmt_at(r, Ctx::Unit, out)
        }
        Formula::Forall(..) | Formula::Exists(..) => {
            // Merge a run of binders of the same kind into one prefix.
            let universal = matches!(f, Formula::Forall(..));
            write!(out, "{}", if universal { "forall" } else { "exists" })?;
            let mut cur = f;
            while let (true, Formula::Forall(v, body)) | (false, Formula::Exists(v, body)) =
                (universal, cur)
            {
                write!(out, " {v}")?;
                cur = body;
            }
            write!(out, ". ")?;
            fmt_at(cur, Ctx::Top, out)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, Ctx::Top, f)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, Atom, Formula, Term};

    fn roundtrip(f: &Formula) {
        let s = f.to_string();
        let g = parse_formula(&s).unwrap_or_else(|e| panic!("'{s}' fails to reparse: {e}"));
        assert_eq!(*f, g, "printed as '{s}'");
    }

    fn x() -> Term {
        Term::var("x")
    }

    fn y() -> Term {
        Term::var("y")
    }

    fn lx0() -> Formula {
        Formula::lit(Atom::Eq(x(), Term::zero()))
    }

    fn ly0() -> Formula {
        Formula::lit(Atom::Eq(y(), Term::zero()))
    }

    fn lxy() -> Formula {
        Formula::lit(Atom::Eq(x(), y()))
    }

    #[test]
    fn simple_literal_forms() {
        assert_eq!(ly0().to_string(), "y = 0");
        assert_eq!(Formula::lit(Atom::Dep(vec![], y())).to_string(), "=(y)");
        assert_eq!(Formula::lit(Atom::Dep(vec![x()], y())).to_string(), "=(x,y)");
        assert_eq!(Formula::nlit(Atom::Eq(x(), y())).to_string(), "!(x = y)");
        assert_eq!(Formula::nlit(Atom::Rel("P".into(), vec![x()])).to_string(), "!P(x)");
    }

    #[test]
    fn precedence_parens() {
        let or_in_and = Formula::and(Formula::or(lx0(), ly0()), lxy());
        assert_eq!(or_in_and.to_string(), "(x = 0 | y = 0) & x = y");
        let and_in_or = Formula::or(Formula::and(lx0(), ly0()), lxy());
        assert_eq!(and_in_or.to_string(), "x = 0 & y = 0 | x = y");
        roundtrip(&or_in_and);
        roundtrip(&and_in_or);
    }

    #[test]
    fn right_nested_chains_get_parens() {
        let right_or = Formula::or(lx0(), Formula::or(ly0(), lxy()));
        assert_eq!(right_or.to_string(), "x = 0 | (y = 0 | x = y)");
        roundtrip(&right_or);
        let left_or = Formula::or(Formula::or(lx0(), ly0()), lxy());
        assert_eq!(left_or.to_string(), "x = 0 | y = 0 | x = y");
        roundtrip(&left_or);
    }

    #[test]
    fn quantifier_merging_and_parens() {
        let f = Formula::forall("x", Formula::forall("y", lxy()));
        assert_eq!(f.to_string(), "forall x y. x = y");
        roundtrip(&f);
        let g = Formula::and(lx0(), Formula::exists("y", ly0()));
        assert_eq!(g.to_string(), "x = 0 & (exists y. y = 0)");
        roundtrip(&g);
        let h = Formula::forall("x", Formula::exists("y", lxy()));
        assert_eq!(h.to_string(), "forall x. exists y. x = y");
        roundtrip(&h);
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = Formula::forall("x", Formula::or(lx0(), ly0()));
        assert_eq!(f.to_string(), "forall x. x = 0 | y = 0");
        roundtrip(&f);
    }
}
