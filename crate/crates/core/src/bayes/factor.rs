use super::{BayesNet, Cpt, VarId};

/// Dense table over a scope of variables, last variable fastest.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    pub vars: Vec<VarId>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut out = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * cards[i + 1];
    }
    out
}

/// Advances a mixed-radix counter; false once it wraps to all zeros.
fn advance(assign: &mut [usize], cards: &[usize]) -> bool {
    for i in (0..assign.len()).rev() {
        assign[i] += 1;
        if assign[i] < cards[i] {
            return true;
        }
        assign[i] = 0;
    }
    false
}

impl Factor {
    pub fn from_cpt(net: &BayesNet, cpt: &Cpt) -> Self {
        let mut vars = cpt.parents.clone();
        vars.push(cpt.child);
        let cards = vars
            .iter()
            .map(|&v| net.variables()[net.position(v)].cardinality())
            .collect();
        Factor {
            vars,
            cards,
            values: cpt.table.clone(),
        }
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.vars.contains(&var)
    }

    /// Restricts `var` to `state` and drops it from the scope.
    pub fn reduce(&self, var: VarId, state: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assign = vec![0usize; self.vars.len()];
        let src_strides = strides(&self.cards);
        loop {
            if assign[pos] == state {
                let idx: usize = assign.iter().zip(&src_strides).map(|(a, s)| a * s).sum();
                values.push(self.values[idx]);
            }
            if !advance(&mut assign, &self.cards) {
                break;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(v) {
                vars.push(*v);
                cards.push(*c);
            }
        }
        let sa = strides(&self.cards);
        let sb = strides(&other.cards);
        let map = |scope: &[VarId], st: &[usize]| -> Vec<usize> {
            vars.iter()
                .map(|v| scope.iter().position(|x| x == v).map_or(0, |i| st[i]))
                .collect()
        };
        let ma = map(&self.vars, &sa);
        let mb = map(&other.vars, &sb);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assign = vec![0usize; vars.len()];
        loop {
            let mut ia = 0;
            let mut ib = 0;
            for (k, &a) in assign.iter().enumerate() {
                ia += a * ma[k];
                ib += a * mb[k];
            }
            values.push(self.values[ia] * other.values[ib]);
            if !advance(&mut assign, &cards) {
                break;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn sum_out(&self, var: VarId) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let dst = strides(&cards);
        let mut map = Vec::with_capacity(self.vars.len());
        let mut k = 0;
        for i in 0..self.vars.len() {
            if i == pos {
                map.push(0);
            } else {
                map.push(dst[k]);
                k += 1;
            }
        }
        let size: usize = cards.iter().product();
        let mut values = vec![0.0; size];
        let mut assign = vec![0usize; self.vars.len()];
        let mut src = 0usize;
        loop {
            let idx: usize = assign.iter().zip(&map).map(|(a, s)| a * s).sum();
            values[idx] += self.values[src];
            src += 1;
            if !advance(&mut assign, &self.cards) {
                break;
            }
        }
        Factor { vars, cards, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(vars: &[usize], cards: &[usize], values: &[f64]) -> Factor {
        Factor {
            vars: vars.iter().map(|&v| VarId(v)).collect(),
            cards: cards.to_vec(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn product_and_sum_out() {
        // P(A) * P(B|A), then sum out A gives P(B)
        let pa = f(&[0], &[2], &[0.2, 0.8]);
        let pb_a = f(&[0, 1], &[2, 2], &[0.9, 0.1, 0.3, 0.7]);
        let joint = pa.product(&pb_a);
        assert_eq!(joint.vars, vec![VarId(0), VarId(1)]);
        assert_eq!(joint.values, vec![0.2 * 0.9, 0.2 * 0.1, 0.8 * 0.3, 0.8 * 0.7]);
        let pb = joint.sum_out(VarId(0));
        assert_eq!(pb.vars, vec![VarId(1)]);
        assert!((pb.values[0] - (0.18 + 0.24)).abs() < 1e-15);
        assert!((pb.values[1] - (0.02 + 0.56)).abs() < 1e-15);
    }

    #[test]
    fn reduce_middle_variable() {
        let x = f(&[0, 1, 2], &[2, 3, 2], &(0..12).map(f64::from).collect::<Vec<_>>());
        let r = x.reduce(VarId(1), 2);
        assert_eq!(r.vars, vec![VarId(0), VarId(2)]);
        assert_eq!(r.values, vec![4.0, 5.0, 10.0, 11.0]);
    }

    #[test]
    fn scalar_factor_product() {
        let unit = f(&[], &[], &[1.0]);
        let pa = f(&[3], &[2], &[0.25, 0.75]);
        assert_eq!(unit.product(&pa).values, pa.values);
        let total = pa.sum_out(VarId(3));
        assert!(total.vars.is_empty());
        assert_eq!(total.values, vec![1.0]);
    }
}
