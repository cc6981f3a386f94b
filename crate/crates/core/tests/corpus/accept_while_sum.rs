// slice: accept
// expect: accept
// rustc: ok
// run: 55
fn main() -> i32 {
    let mut i = 1;
    let mut total = 0;
    while i <= 10 {
        total = total + i;
        i = i + 1;
    }
    return total;
}
