#include "safesim/jitter.hpp"

int main(int argc, char** argv) {
    return safesim::analyze_cli({argv + 1, argv + argc});
}
