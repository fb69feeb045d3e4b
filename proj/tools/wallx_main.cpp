#include <cstdio>
int main() { std::puts("wallx: not yet implemented"); return 3; }
