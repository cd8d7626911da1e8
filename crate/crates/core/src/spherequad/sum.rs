//! Deterministic summation.

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Element-wise compensated accumulation of equally long vectors, in order.
pub fn compensated_vector_sum<'a, I>(len: usize, parts: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut sum = vec![0.0f64; len];
    let mut comp = vec![0.0f64; len];
    for part in parts {
        for ((s, c), &v) in sum.iter_mut().zip(comp.iter_mut()).zip(part) {
            let t = *s + v;
            if s.abs() >= v.abs() {
                *c += (*s - t) + v;
            } else {
                *c += (v - t) + *s;
            }
            *s = t;
        }
    }
    sum.iter().zip(&comp).map(|(s, c)| s + c).collect()
}
