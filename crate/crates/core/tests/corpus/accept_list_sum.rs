// slice: accept
// expect: accept
// rustc: ok
// run: 6
enum List { Cons(i32, Box<List>), Nil }

fn sum(l: &List) -> i32 {
    match *l {
        List::Cons(v, ref next) => {
            return v + sum(&**next);
        }
        List::Nil => {
            return 0;
        }
    }
}

fn main() -> i32 {
    let l = List::Cons(1, Box::new(List::Cons(2, Box::new(List::Cons(3, Box::new(List::Nil))))));
    return sum(&l);
}
