use std::collections::BTreeMap;

/// Plug-in mutual information (nats) between two discrete labelings of the
/// same instances.
pub fn mutual_information(x: &[usize], y: &[usize]) -> f64 {
    assert_eq!(x.len(), y.len(), "labelings differ in length");
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut px: BTreeMap<usize, usize> = BTreeMap::new();
    let mut py: BTreeMap<usize, usize> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *joint.entry((a, b)).or_default() += 1;
        *px.entry(a).or_default() += 1;
        *py.entry(b).or_default() += 1;
    }
    let n = n as f64;
    let mi: f64 = joint
        .iter()
        .map(|(&(a, b), &c)| {
            let pxy = c as f64 / n;
            let pa = px[&a] as f64 / n;
            let pb = py[&b] as f64 / n;
            pxy * (pxy / (pa * pb)).ln()
        })
        .sum();
    mi.max(0.0)
}
