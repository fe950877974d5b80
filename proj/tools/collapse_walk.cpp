#include "collapse/cli/config.hpp"
#include "collapse/cli/runner.hpp"
#include "collapse/error.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    using namespace collapse;
    cli::RunConfig config;
    try {
        config = cli::parse_config(argc, argv);
    } catch (const cli::HelpRequested& help) {
        std::cout << help.text;
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_code_for(e.code());
    }
    return cli::execute(config, std::cout, std::cerr);
}
