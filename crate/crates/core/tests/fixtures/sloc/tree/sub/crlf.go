package main

// c
func main() {}
