// slice: accept
// expect: accept
// rustc: ok
// run: 10
enum Opt { Some(Box<i32>), None }

fn peek(o: &Opt) -> i32 {
    match *o {
        Opt::Some(ref b) => {
            return **b;
        }
        Opt::None => {
            return 0;
        }
    }
}

fn main() -> i32 {
    let o = Opt::Some(Box::new(5));
    let a = peek(&o);
    let b = peek(&o);
    return a + b;
}
