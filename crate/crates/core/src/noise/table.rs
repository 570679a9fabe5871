/// A finite distribution over outcomes whose probabilities sum to `total ≤ 1`;
/// the remaining mass `1 − total` is "nothing happens".
#[derive(Clone, Debug, PartialEq)]
pub struct Discrete<T> {
    items: Vec<T>,
    probs: Vec<f64>,
    cum: Vec<f64>,
    total: f64,
}

impl<T: Clone + PartialEq> Discrete<T> {
    /// Builds the table, merging repeated outcomes and dropping zero weights.
    pub fn from_weights<I: IntoIterator<Item = (T, f64)>>(weights: I) -> Self {
        let mut items: Vec<T> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for (item, w) in weights {
            if w <= 0.0 {
                continue;
            }
            match items.iter().position(|x| *x == item) {
                Some(i) => probs[i] += w,
                None => {
                    items.push(item);
                    probs.push(w);
                }
            }
        }
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cum.push(acc);
        }
        Discrete {
            items,
            probs,
            cum,
            total: acc,
        }
    }
}

impl<T> Discrete<T> {
    pub fn empty() -> Self {
        Discrete {
            items: Vec::new(),
            probs: Vec::new(),
            cum: Vec::new(),
            total: 0.0,
        }
    }

    /// Probability that some outcome occurs.
    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, f64)> {
        self.items.iter().zip(self.probs.iter().copied())
    }

    pub fn item(&self, i: usize) -> &T {
        &self.items[i]
    }

    /// Maps a uniform draw `u ∈ [0,1)` to an outcome, or `None` when
    /// `u ≥ total`.
    #[inline]
    pub fn sample(&self, u: f64) -> Option<&T> {
        if u >= self.total {
            return None;
        }
        let i = self.cum.partition_point(|&c| c <= u);
        Some(&self.items[i.min(self.items.len() - 1)])
    }

    /// Outcome drawn conditional on something happening.
    #[inline]
    pub fn sample_given_event(&self, u: f64) -> &T {
        debug_assert!(self.total > 0.0);
        let i = self.cum.partition_point(|&c| c <= u * self.total);
        &self.items[i.min(self.items.len() - 1)]
    }
}
