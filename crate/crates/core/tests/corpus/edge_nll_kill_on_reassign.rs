// slice: edge-nll
// expect: accept
// rustc: ok
// run: 12
fn main() -> i32 {
    let mut a = 1;
    let mut b = 2;
    let mut p = &mut a;
    let q = &mut *p;
    p = &mut b;
    *p = 7;
    *q = 5;
    return a + b;
}
