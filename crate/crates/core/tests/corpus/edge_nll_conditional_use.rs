// slice: edge-nll
// expect: accept
// rustc: ok
// run: 6
fn main() -> i32 {
    let mut x = 1;
    let c = x > 0;
    let r = &mut x;
    if c {
        *r = 5;
    }
    x = x + 1;
    return x;
}
