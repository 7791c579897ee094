//! Scoped-thread fan-out over independent items.

use std::thread;

/// Worker threads to use when the caller does not say.
pub fn default_threads() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

/// `items.map(f)` across up to `threads` threads, preserving order.
pub fn map<T, U, F>(items: &[T], threads: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync,
{
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let f = &f;
    let mut out: Vec<Option<U>> = (0..items.len()).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                s.spawn(move || {
                    (w..items.len())
                        .step_by(threads)
                        .map(|i| (i, f(i, &items[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, u) in h.join().expect("parallel task panicked") {
                out[i] = Some(u);
            }
        }
    });
    out.into_iter().map(|u| u.expect("every item mapped")).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..37).collect();
        assert_eq!(super::map(&xs, 4, |i, x| x * 2 + i as u64), (0..37).map(|x| x * 3).collect::<Vec<_>>());
        assert!(super::map(&Vec::<u8>::new(), 3, |_, x| *x).is_empty());
    }
}
