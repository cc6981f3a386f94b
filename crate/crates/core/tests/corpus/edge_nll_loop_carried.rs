// slice: edge-nll
// expect: reject RL0203
// rustc: E0506
fn main() -> i32 {
    let mut x = 1;
    let mut r = &x;
    let mut i = 0;
    let mut acc = 0;
    while i < 3 {
        x = x + 1;
        acc = acc + *r;
        r = &x;
        i = i + 1;
    }
    return acc;
}
