// slice: accept
// expect: accept
// rustc: ok
// run: trap DivByZero
fn div(a: i32, b: i32) -> i32 {
    return a / b;
}

fn main() -> i32 {
    let b = Box::new(7);
    return div(*b, 0);
}
