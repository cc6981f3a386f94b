// slice: edge-nll
// expect: reject RL0203
// rustc: E0506
fn first_or_reset<'a>(m: &'a mut i32) -> &'a mut i32 {
    let r = &mut *m;
    if *r > 0 {
        return r;
    }
    *m = 1;
    return m;
}

fn main() -> i32 {
    let mut a = 5;
    let mut b = 0;
    let ra = first_or_reset(&mut a);
    *ra = *ra + 1;
    let rb = first_or_reset(&mut b);
    *rb = *rb + 1;
    return a * 10 + b;
}
