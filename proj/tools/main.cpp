#include <cstdio>
int main() { std::fprintf(stderr, "cli not implemented yet\n"); return 2; }
