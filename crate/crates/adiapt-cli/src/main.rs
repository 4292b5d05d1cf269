fn main() {
    println!("adiapt");
}
