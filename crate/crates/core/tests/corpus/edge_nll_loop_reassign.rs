// slice: edge-nll
// expect: accept
// rustc: ok
// run: 6
fn main() -> i32 {
    let mut x = 1;
    let mut r = &x;
    let mut i = 0;
    let mut acc = 0;
    while i < 3 {
        acc = acc + *r;
        x = x + 1;
        r = &x;
        i = i + 1;
    }
    return acc;
}
