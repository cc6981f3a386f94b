// slice: edge-nll
// expect: accept
// rustc: ok
// run: 3
fn main() -> i32 {
    let mut x = 1;
    let r = &x;
    let y = *r;
    x = 2;
    return x + y;
}
