// slice: accept
// expect: accept
// rustc: ok
// run: 92
fn main() -> i32 {
    let a = 47;
    let b = 5;
    return (a / b) * 10 + a % b;
}
