#include <cstdio>
int main() { std::puts("irisnp cli placeholder"); return 0; }
