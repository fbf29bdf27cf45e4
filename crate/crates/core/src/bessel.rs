//! Bessel functions of the first kind for integer order.
//!
//! Orders are evaluated together with Miller's downward recurrence,
//! normalized by `J_0 + 2 Σ J_{2k} = 1`, which stays accurate for the tiny
//! high-order values that appear at small arguments.

/// `J_0(x) … J_{n_max}(x)`.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let big = ax.max(n_max as f64);
    let mut start = (big + 20.0 + 8.0 * big.sqrt()).ceil() as usize;
    start += start % 2;

    const RESCALE: f64 = 1e250;
    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / ax * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let order = k - 1;
        if order <= n_max {
            out[order] = j_cur;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > RESCALE {
            j_cur /= RESCALE;
            j_next /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
    }
    norm += j_cur;
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_orders(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `J_ℓ(x)` for each order in `orders`, sharing one recurrence.
pub fn bessel_j_many(orders: &[i32], x: f64) -> Vec<f64> {
    let n_max = orders.iter().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0);
    let table = bessel_j_orders(n_max, x);
    orders
        .iter()
        .map(|&n| {
            let m = n.unsigned_abs() as usize;
            if n < 0 && m % 2 == 1 {
                -table[m]
            } else {
                table[m]
            }
        })
        .collect()
}
