// slice: accept
// expect: accept
// rustc: ok
// run: 12
fn main() -> i32 {
    let x = 4;
    let r1 = &x;
    let r2 = &x;
    return *r1 + *r2 + x;
}
