#include "commands.hpp"

int main(int argc, char** argv)
{
    return entrobound::cli::main_entry(argc, argv);
}
