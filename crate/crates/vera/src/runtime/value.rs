//! Runtime values. Exact integers and rationals, finite reals, strings,
//! and the two composites (lists and string-keyed maps). Integer-valued
//! rationals normalize to integers at construction, so exactness is never
//! lost and downstream conversions stay simple.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use crate::model::Rational;

#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Rational(Rational),
    Real(f64),
    Bool(bool),
    Str(Rc<str>),
    List(Rc<RefCell<Vec<Value>>>),
    Map(Rc<BTreeMap<String, Value>>),
    Tuple(Rc<Vec<Value>>),
    None,
}

impl Value {
    pub fn from_rational(r: Rational) -> Value {
        if r.is_integer() {
            Value::Int(r.numer())
        } else {
            Value::Rational(r)
        }
    }

    pub fn str(s: impl AsRef<str>) -> Value {
        Value::Str(Rc::from(s.as_ref()))
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Rational(_) => "rational",
            Value::Real(_) => "real",
            Value::Bool(_) => "bool",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Map(_) => "map",
            Value::Tuple(_) => "tuple",
            Value::None => "none",
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Rational(_) | Value::Real(_))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Rational(r) => Some(r.to_f64()),
            Value::Real(v) => Some(*v),
            _ => None,
        }
    }

    /// Canonical text for scalar values, matching template substitution:
    /// decimal integers, `p/q` rationals, shortest round-trip reals.
    pub fn scalar_text(&self) -> Option<String> {
        match self {
            Value::Int(v) => Some(v.to_string()),
            Value::Rational(r) => Some(format!("{}/{}", r.numer(), r.denom())),
            Value::Real(v) => Some(v.to_string()),
            Value::Bool(b) => Some(if *b { "True" } else { "False" }.to_string()),
            Value::Str(s) => Some(s.to_string()),
            Value::None => Some("None".to_string()),
            _ => None,
        }
    }

    /// Structural equality with numeric coercion across int, rational, and
    /// real. Mismatched non-numeric kinds compare unequal, never error.
    pub fn loose_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Rational(a), Value::Rational(b)) => a == b,
            (Value::Int(a), Value::Rational(b)) | (Value::Rational(b), Value::Int(a)) => {
                b.is_integer() && b.numer() == *a
            }
            (a, b) if a.is_numeric() && b.is_numeric() => {
                // At least one side is a real; compare as f64.
                a.as_f64() == b.as_f64()
            }
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::None, Value::None) => true,
            (Value::List(a), Value::List(b)) => {
                let (a, b) = (a.borrow(), b.borrow());
                a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.loose_eq(y))
            }
            (Value::Tuple(a), Value::Tuple(b)) => {
                a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.loose_eq(y))
            }
            (Value::Map(a), Value::Map(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b.iter()).all(|((ka, va), (kb, vb))| {
                        ka == kb && va.loose_eq(vb)
                    })
            }
            _ => false,
        }
    }
}
