use std::cmp::Ordering;
use std::iter::Sum;

use serde::{Deserialize, Serialize};

/// Total orders on exponent vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonomialOrder {
    Lex,
    GrevLex,
    /// Graded reverse lex on the first `split` indeterminates, ties broken by
    /// graded reverse lex on the rest. Eliminates the first block.
    Block { split: usize },
}

impl MonomialOrder {
    pub fn cmp<T>(&self, a: &[T], b: &[T]) -> Ordering
    where
        T: Ord + Clone + for<'a> Sum<&'a T>,
    {
        debug_assert_eq!(a.len(), b.len());
        match *self {
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::GrevLex => grevlex(a, b),
            MonomialOrder::Block { split } => {
                let split = split.min(a.len());
                grevlex(&a[..split], &b[..split]).then_with(|| grevlex(&a[split..], &b[split..]))
            }
        }
    }
}

fn grevlex<T>(a: &[T], b: &[T]) -> Ordering
where
    T: Ord + Clone + for<'a> Sum<&'a T>,
{
    let da: T = a.iter().sum();
    let db: T = b.iter().sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            match x.cmp(y) {
                Ordering::Equal => continue,
                // smaller exponent in the last differing variable wins
                o => return o.reverse(),
            }
        }
        Ordering::Equal
    })
}
