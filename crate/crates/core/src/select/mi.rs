//! Discretization and empirical mutual information.

/// Equal-frequency bin of every value: `floor(bins * #{values < v} / n)`.
/// Tied values share a bin, so any strictly increasing transform of the
/// column leaves the bins unchanged.
pub fn equal_frequency_bins(x: &[f64], bins: usize) -> Vec<usize> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0; n];
    let mut below = 0;
    let mut p = 0;
    while p < n {
        let mut q = p;
        while q < n && x[order[q]] == x[order[p]] {
            q += 1;
        }
        let bin = (bins * below / n).min(bins - 1);
        for &i in &order[p..q] {
            out[i] = bin;
        }
        below = q;
        p = q;
    }
    out
}

/// `sum p(a,b) ln(p(a,b) / (p(a) p(b)))` in nats over the joint counts.
pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "mutual information needs equal lengths");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut joint = vec![0usize; ka * kb];
    let mut pa = vec![0usize; ka];
    let mut pb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * kb + y] += 1;
        pa[x] += 1;
        pb[y] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let pxy = c as f64 / nf;
                mi += pxy * (pxy / (pa[x] as f64 / nf * pb[y] as f64 / nf)).ln();
            }
        }
    }
    mi.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_and_identity() {
        assert_eq!(mutual_information(&[0; 10], &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]), 0.0);
        let y = [0, 1, 0, 1, 1, 0, 1, 0];
        assert!((mutual_information(&y, &y) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn three_class_table() {
        // joint counts [[2,1,0],[0,2,1],[1,0,3]] over 10 samples
        let table = [[2, 1, 0], [0, 2, 1], [1, 0, 3]];
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (x, row) in table.iter().enumerate() {
            for (y, &c) in row.iter().enumerate() {
                for _ in 0..c {
                    a.push(x);
                    b.push(y);
                }
            }
        }
        let pa = [0.3, 0.3, 0.4];
        let pb = [0.3, 0.3, 0.4];
        let mut expect = 0.0;
        for x in 0..3 {
            for y in 0..3 {
                let p = table[x][y] as f64 / 10.0;
                if p > 0.0 {
                    expect += p * (p / (pa[x] * pb[y])).ln();
                }
            }
        }
        assert!((mutual_information(&a, &b) - expect).abs() < 1e-12);
    }

    #[test]
    fn bins_are_balanced_and_share_ties() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b = equal_frequency_bins(&x, 10);
        for k in 0..10 {
            assert_eq!(b.iter().filter(|&&v| v == k).count(), 10);
        }
        assert_eq!(equal_frequency_bins(&[3.0, 1.0, 3.0, 2.0], 2), vec![1, 0, 1, 0]);
    }

    proptest! {
        #[test]
        fn symmetric_and_transform_invariant(x in prop::collection::vec(-10.0f64..10.0, 20..60), z in prop::collection::vec(-10.0f64..10.0, 60)) {
            let z = &z[..x.len()];
            let bx = equal_frequency_bins(&x, 10);
            let bz = equal_frequency_bins(z, 10);
            prop_assert!((mutual_information(&bx, &bz) - mutual_information(&bz, &bx)).abs() < 1e-12);
            let tx: Vec<f64> = x.iter().map(|v| v.exp() * 3.0 + 1.0).collect();
            prop_assert_eq!(equal_frequency_bins(&tx, 10), bx);
        }
    }
}
