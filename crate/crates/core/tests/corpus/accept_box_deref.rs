// slice: accept
// expect: accept
// rustc: ok
// run: 42
fn main() -> i32 {
    let a = Box::new(20);
    let b = Box::new(22);
    return *a + *b;
}
