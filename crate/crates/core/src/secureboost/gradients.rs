use super::Task;

/// First and second order gradients, row-major `n × outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub outputs: usize,
}

impl GradientPair {
    pub fn len(&self) -> usize {
        self.grad.len() / self.outputs
    }

    pub fn is_empty(&self) -> bool {
        self.grad.is_empty()
    }

    /// Gradients of output `k` as contiguous vectors.
    pub fn column(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let g = self.grad.iter().skip(k).step_by(self.outputs).copied().collect();
        let h = self.hess.iter().skip(k).step_by(self.outputs).copied().collect();
        (g, h)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}

/// Logistic loss gradients for binary tasks, softmax cross-entropy gradients
/// (diagonal hessian) for multiclass. `scores` is row-major `n × outputs`.
pub fn compute_gradients(scores: &[f64], labels: &[usize], task: Task) -> GradientPair {
    let outputs = task.num_outputs();
    assert_eq!(scores.len(), labels.len() * outputs, "scores and labels disagree in length");
    let mut grad = Vec::with_capacity(scores.len());
    let mut hess = Vec::with_capacity(scores.len());
    match task {
        Task::Binary => {
            for (&s, &y) in scores.iter().zip(labels) {
                let p = sigmoid(s);
                grad.push(p - y as f64);
                hess.push(p * (1.0 - p));
            }
        }
        Task::Multiclass(_) => {
            let mut probs = vec![0.0; outputs];
            for (row, &y) in scores.chunks_exact(outputs).zip(labels) {
                probs.copy_from_slice(row);
                softmax_in_place(&mut probs);
                for (k, &p) in probs.iter().enumerate() {
                    grad.push(p - if k == y { 1.0 } else { 0.0 });
                    hess.push(p * (1.0 - p));
                }
            }
        }
    }
    GradientPair { grad, hess, outputs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_at_zero_score() {
        let gp = compute_gradients(&[0.0, 0.0], &[1, 0], Task::Binary);
        assert_eq!(gp.grad, vec![-0.5, 0.5]);
        assert_eq!(gp.hess, vec![0.25, 0.25]);
    }

    #[test]
    fn binary_saturates() {
        let gp = compute_gradients(&[40.0], &[1], Task::Binary);
        assert!(gp.grad[0].abs() < 1e-15);
        assert!(gp.hess[0] < 1e-15);
        let gp = compute_gradients(&[-800.0], &[1], Task::Binary);
        assert!((gp.grad[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn multiclass_uniform_scores() {
        let scores = vec![0.0; 10];
        let gp = compute_gradients(&scores, &[3], Task::Multiclass(10));
        for (k, &g) in gp.grad.iter().enumerate() {
            let expected = if k == 3 { 0.1 - 1.0 } else { 0.1 };
            assert!((g - expected).abs() < 1e-12, "class {k}: {g}");
        }
        assert!(gp.hess.iter().all(|&h| (h - 0.09).abs() < 1e-12));
    }

    #[test]
    fn column_extraction() {
        let gp = compute_gradients(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &[0, 2], Task::Multiclass(3));
        let (g2, _) = gp.column(2);
        assert_eq!(g2.len(), 2);
        assert!((g2[1] - (1.0 / 3.0 - 1.0)).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn binary_bounds(s in -50.0f64..50.0, y in 0usize..2) {
            let gp = compute_gradients(&[s], &[y], Task::Binary);
            proptest::prop_assert!(gp.grad[0].abs() <= 1.0);
            proptest::prop_assert!(gp.hess[0] >= 0.0 && gp.hess[0] <= 0.25);
        }
    }
}
